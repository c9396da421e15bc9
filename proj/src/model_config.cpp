#include <fstream>
#include <sstream>

#include "mbcs/model.hpp"
#include "toml.hpp"

namespace mbcs {

namespace {

double require_number(const toml::table& t, std::string_view key, std::string_view where) {
  const auto* node = t.get(key);
  if (!node) throw ConfigError(std::string(where) + ": missing key '" + std::string(key) + "'");
  if (auto v = node->value<double>()) return *v;
  throw ConfigError(std::string(where) + ": key '" + std::string(key) + "' must be a number");
}

}  // namespace

ModelConfig parse_model_config(std::string_view toml_text, std::string_view default_id) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "model config: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(os.str());
  }

  ModelConfig cfg;
  cfg.id = root["id"].value_or(std::string(default_id));
  if (auto d = root["dimension"].value<int64_t>())
    cfg.dimension = static_cast<int>(*d);
  else
    throw ConfigError("model config: missing integer key 'dimension'");

  const auto* bands = root["bands"].as_array();
  if (!bands || bands->empty()) throw ConfigError("model config: 'bands' must be a non-empty array of tables");
  std::size_t i = 0;
  for (const auto& node : *bands) {
    const auto* t = node.as_table();
    const std::string where = "bands[" + std::to_string(i++) + "]";
    if (!t) throw ConfigError(where + " must be a table");
    cfg.bands.push_back({require_number(*t, "mass", where), require_number(*t, "mu", where)});
  }

  if (const auto* inter = root["interactions"].as_array()) {
    i = 0;
    for (const auto& node : *inter) {
      const auto* t = node.as_table();
      const std::string where = "interactions[" + std::to_string(i++) + "]";
      if (!t) throw ConfigError(where + " must be a table");
      const auto* pair = t->get_as<toml::array>("pair");
      if (!pair || pair->size() != 2) throw ConfigError(where + ": 'pair' must be a two-element array");
      auto first = (*pair)[0].value<int64_t>();
      auto second = (*pair)[1].value<int64_t>();
      if (!first || !second || *first < 1 || *second < 1)
        throw ConfigError(where + ": 'pair' entries must be 1-based band indices");
      InteractionSpec spec;
      spec.a = static_cast<std::size_t>(*first - 1);
      spec.b = static_cast<std::size_t>(*second - 1);
      auto family = t->get_as<std::string>("family");
      if (!family) throw ConfigError(where + ": missing string key 'family'");
      spec.family = family->get();
      spec.strength = require_number(*t, "strength", where);
      spec.range = require_number(*t, "range", where);
      cfg.interactions.push_back(spec);
    }
  }
  return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str(), path.stem().string());
}

ModelInstance load_model(const std::filesystem::path& path) { return build_model(load_model_config(path)); }

}  // namespace mbcs
