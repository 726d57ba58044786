#include "dsim/constants.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dsim {

namespace {

double* slot(Constants& c, const std::string& name) {
  if (name == "c") return &c.c;
  if (name == "C_blk") return &c.C_blk;
  if (name == "C_amp") return &c.C_amp;
  if (name == "C_l2") return &c.C_l2;
  if (name == "c_L") return &c.c_L;
  if (name == "c_T") return &c.c_T;
  return nullptr;
}

}  // namespace

void set_constant(Constants& c, const std::string& name, double value) {
  double* p = slot(c, name);
  if (!p) throw std::invalid_argument("unknown constant '" + name + "'");
  if (!(std::isfinite(value) && value > 0.0)) {
    throw std::invalid_argument("constant '" + name + "' must be positive and finite");
  }
  *p = value;
}

Constants constants_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("constants: expected a JSON object");
  Constants c;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else if (key == "comment") {
      continue;
    } else {
      if (!value.is_number()) {
        throw std::invalid_argument("constant '" + key + "' must be a number");
      }
      set_constant(c, key, value.get<double>());
    }
  }
  return c;
}

nlohmann::json to_json(const Constants& c) {
  return {{"c", c.c},       {"C_blk", c.C_blk}, {"C_amp", c.C_amp},
          {"C_l2", c.C_l2}, {"c_L", c.c_L},     {"c_T", c.c_T},
          {"seed", c.seed}};
}

Constants load_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants file " + path);
  return constants_from_json(nlohmann::json::parse(in));
}

void save_constants(const Constants& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write constants file " + path);
  out << to_json(c).dump(2) << '\n';
}

}  // namespace dsim
