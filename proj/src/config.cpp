#include "cbcond/config.hpp"

#include <fstream>
#include <sstream>

#include "cbcond/errors.hpp"

namespace cbcond {

namespace {

using nlohmann::json;

double number_field(const json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ConfigError(where + ": missing field '" + field + "'");
  if (!it->is_number()) throw ConfigError(where + ": field '" + field + "' must be a number");
  return it->get<double>();
}

std::vector<double> number_array(const json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ConfigError(where + ": missing field '" + field + "'");
  if (!it->is_array()) throw ConfigError(where + ": field '" + field + "' must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number()) {
      throw ConfigError(where + ": " + field + "[" + std::to_string(i) + "] must be a number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

LevyMeasure levy_from_json(const json& obj) {
  if (!obj.is_object()) throw ConfigError("levy: must be an object");
  const auto kind = obj.find("kind");
  if (kind == obj.end() || !kind->is_string()) {
    throw ConfigError("levy: missing string field 'kind'");
  }
  const auto k = kind->get<std::string>();
  if (k == "none") return LevyMeasure::none();
  if (k == "power_law") {
    return LevyMeasure::power_law(number_field(obj, "c", "levy"), number_field(obj, "a", "levy"));
  }
  if (k == "table") {
    std::optional<double> tail;
    const auto t = obj.find("tail_exponent");
    if (t != obj.end() && !t->is_null()) {
      if (!t->is_number()) throw ConfigError("levy: field 'tail_exponent' must be a number or null");
      tail = t->get<double>();
    }
    return LevyMeasure::tabulated(number_array(obj, "r", "levy"),
                                  number_array(obj, "density", "levy"), tail);
  }
  throw ConfigError("levy: unknown kind '" + k + "' (expected none, power_law or table)");
}

}  // namespace

BranchingMechanism mechanism_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("mechanism config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "alpha" && key != "sigma2" && key != "levy" && key != "closed_form" &&
        key != "tol") {
      throw ConfigError("unknown field '" + key + "' in mechanism config");
    }
  }
  double tol = 1e-10;
  if (doc.contains("tol")) tol = number_field(doc, "tol", "config");

  if (doc.contains("closed_form")) {
    if (!doc["closed_form"].is_string()) throw ConfigError("field 'closed_form' must be a string");
    const auto cf = ClosedForm::parse(doc["closed_form"].get<std::string>());
    const auto reg = BranchingMechanism::from_closed_form(cf, tol);
    const double alpha = doc.contains("alpha") ? number_field(doc, "alpha", "config") : reg.alpha();
    const double sigma2 =
        doc.contains("sigma2") ? number_field(doc, "sigma2", "config") : reg.sigma2();
    LevyMeasure levy = doc.contains("levy") ? levy_from_json(doc["levy"]) : reg.levy();
    return {alpha, sigma2, std::move(levy), cf, tol};
  }
  const double alpha = number_field(doc, "alpha", "config");
  const double sigma2 = number_field(doc, "sigma2", "config");
  LevyMeasure levy = doc.contains("levy") ? levy_from_json(doc["levy"]) : LevyMeasure::none();
  return {alpha, sigma2, std::move(levy), std::nullopt, tol};
}

json parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return doc;
}

BranchingMechanism mechanism_from_text(std::string_view text) {
  return mechanism_from_json(parse_config_text(text));
}

json mechanism_to_json(const BranchingMechanism& m) {
  json doc;
  doc["alpha"] = m.alpha();
  doc["sigma2"] = m.sigma2();
  const auto& levy = m.levy();
  if (const auto* p = levy.power_law_params()) {
    doc["levy"] = {{"kind", "power_law"}, {"c", p->c}, {"a", p->a}};
  } else if (const auto* t = levy.table()) {
    json tail = nullptr;
    if (t->tail_exponent) tail = *t->tail_exponent;
    doc["levy"] = {{"kind", "table"}, {"r", t->r}, {"density", t->density}, {"tail_exponent", tail}};
  } else {
    doc["levy"] = {{"kind", "none"}};
  }
  if (m.closed_form()) doc["closed_form"] = m.closed_form()->name();
  doc["tol"] = m.tol();
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace cbcond
