#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tabkit/error.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit::app {
namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& value, const std::string& expected) {
  throw_usage("ConfigError", key + " = '" + value + "': expected " + expected);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += sep;
    out += i;
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) config_error(key, v, "a non-negative integer");
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) config_error(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  config_error(key, v, "true or false");
}

SplitSpec to_split(const std::string& key, const std::string& v) {
  const auto parts = split_list(v, ',');
  if (parts.size() != 3) config_error(key, v, "three comma-separated sizes or fractions");
  if (v.find('.') == std::string::npos)
    return SplitCounts{to_uint(key, parts[0]), to_uint(key, parts[1]), to_uint(key, parts[2])};
  return SplitRatios{to_real(key, parts[0]), to_real(key, parts[1]), to_real(key, parts[2])};
}

std::string split_text(const SplitSpec& s) {
  if (auto c = std::get_if<SplitCounts>(&s))
    return std::to_string(c->train) + "," + std::to_string(c->validation) + "," + std::to_string(c->test);
  const auto& r = std::get<SplitRatios>(s);
  // Keep a decimal point so the value parses back as ratios.
  auto num = [](double d) {
    auto t = format_number(d);
    return t.find_first_of(".e") == std::string::npos ? t + ".0" : t;
  };
  return num(r.train) + "," + num(r.validation) + "," + num(r.test);
}

}  // namespace

ParamGrid RunConfig::grid_for(ModelKind kind) const {
  ParamGrid g = default_grid(kind);
  const std::string prefix = std::string(model_kind_name(kind)) + ".";
  for (const auto& [key, values] : grid_overrides) {
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string param = key.substr(prefix.size());
    bool found = false;
    for (auto& axis : g.axes)
      if (axis.name == param) {
        axis.values = values;
        found = true;
      }
    if (!found) g.axes.push_back({param, values});
  }
  return g;
}

void apply_setting(RunConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  if (key == "pipeline") {
    if (v != "segmentation" && v != "prediction" && v != "both") config_error(key, v, "segmentation|prediction|both");
    c.pipeline = v;
  } else if (key == "seed") c.seed = to_uint(key, v);
  else if (key == "out") c.out = v;
  else if (key == "threads") c.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, to_uint(key, v)));
  else if (key == "strict") c.strict = to_bool(key, v);
  else if (key == "svg") c.svg = to_bool(key, v);
  else if (key == "social_input") c.social_input = v;
  else if (key == "social_n") c.social_n = to_uint(key, v);
  else if (key == "social_seed") c.social_seed = to_uint(key, v);
  else if (key == "social_drop") c.social_drop = split_list(v, ',');
  else if (key == "cap_columns") c.cap_columns = split_list(v, ',');
  else if (key == "iqr_k") c.iqr_k = to_real(key, v);
  else if (key == "cap_order") {
    if (v != "cap_then_standardize" && v != "standardize_then_cap")
      config_error(key, v, "cap_then_standardize|standardize_then_cap");
    c.cap_before_scaling = v == "cap_then_standardize";
  }
  else if (key == "drop_first") c.drop_first = to_bool(key, v);
  else if (key == "pca_k") {
    if (v.empty() || v == "None") c.pca_k.reset();
    else c.pca_k = to_uint(key, v);
  } else if (key == "pca_variance") {
    if (v.empty() || v == "None") c.pca_variance.reset();
    else c.pca_variance = to_real(key, v);
  } else if (key == "k_min") c.k_min = to_uint(key, v);
  else if (key == "k_max") c.k_max = to_uint(key, v);
  else if (key == "kmeans_n_init") c.kmeans_n_init = to_uint(key, v);
  else if (key == "grad_input") c.grad_input = v;
  else if (key == "grad_n") c.grad_n = to_uint(key, v);
  else if (key == "grad_seed") c.grad_seed = to_uint(key, v);
  else if (key == "grad_drop") c.grad_drop = split_list(v, ',');
  else if (key == "label") c.label = v;
  else if (key == "split") c.split = to_split(key, v);
  else if (key == "models") {
    c.models.clear();
    for (const auto& m : split_list(v, ',')) {
      try {
        c.models.push_back(parse_model_kind(m));
      } catch (const Error&) {
        config_error(key, v, "a list of logistic|tree|forest|knn|svm");
      }
    }
  } else if (key == "folds") c.folds = to_uint(key, v);
  else if (key == "scoring") {
    if (v != "f1" && v != "accuracy") config_error(key, v, "f1|accuracy");
    c.scoring = v == "f1" ? Scoring::F1 : Scoring::Accuracy;
  } else if (key.rfind("grid.", 0) == 0) {
    const std::string rest = key.substr(5);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) config_error(key, v, "a key of the form grid.<model>.<parameter>");
    try {
      parse_model_kind(rest.substr(0, dot));
    } catch (const Error&) {
      config_error(key, v, "a model kind of logistic|tree|forest|knn|svm after 'grid.'");
    }
    std::vector<ParamValue> values;
    for (const auto& item : split_list(v, '|')) values.push_back(parse_param(item));
    if (values.empty()) config_error(key, v, "at least one value");
    c.grid_overrides[rest] = std::move(values);
  } else if (key == "shap_background") c.shap_background = to_uint(key, v);
  else if (key == "shap_instances") c.shap_instances = to_uint(key, v);
  else if (key == "shap_permutations") c.shap_permutations = to_uint(key, v);
  else throw_usage("ConfigError", "unknown configuration key '" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("FileUnreadable", "cannot open config file " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw_usage("ConfigError", path + ":" + std::to_string(number) + ": expected 'key = value'");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c, bool runtime) {
  std::vector<std::pair<std::string, std::string>> e;
  auto opt_text = [](const auto& o) { return o ? format_number(static_cast<double>(*o)) : std::string("None"); };
  e.emplace_back("pipeline", c.pipeline);
  e.emplace_back("seed", std::to_string(c.seed));
  if (runtime) {
    e.emplace_back("out", c.out);
    e.emplace_back("threads", std::to_string(c.threads));
  }
  e.emplace_back("strict", c.strict ? "true" : "false");
  e.emplace_back("svg", c.svg ? "true" : "false");
  e.emplace_back("social_input", c.social_input);
  e.emplace_back("social_n", std::to_string(c.social_n));
  e.emplace_back("social_seed", std::to_string(c.social_seed));
  e.emplace_back("social_drop", join(c.social_drop, ','));
  e.emplace_back("cap_columns", join(c.cap_columns, ','));
  e.emplace_back("iqr_k", format_number(c.iqr_k));
  e.emplace_back("cap_order", c.cap_before_scaling ? "cap_then_standardize" : "standardize_then_cap");
  e.emplace_back("drop_first", c.drop_first ? "true" : "false");
  e.emplace_back("pca_k", opt_text(c.pca_k));
  e.emplace_back("pca_variance", opt_text(c.pca_variance));
  e.emplace_back("k_min", std::to_string(c.k_min));
  e.emplace_back("k_max", std::to_string(c.k_max));
  e.emplace_back("kmeans_n_init", std::to_string(c.kmeans_n_init));
  e.emplace_back("grad_input", c.grad_input);
  e.emplace_back("grad_n", std::to_string(c.grad_n));
  e.emplace_back("grad_seed", std::to_string(c.grad_seed));
  e.emplace_back("grad_drop", join(c.grad_drop, ','));
  e.emplace_back("label", c.label);
  e.emplace_back("split", split_text(c.split));
  std::vector<std::string> models;
  for (auto m : c.models) models.emplace_back(model_kind_name(m));
  e.emplace_back("models", join(models, ','));
  e.emplace_back("folds", std::to_string(c.folds));
  e.emplace_back("scoring", std::string(scoring_name(c.scoring)));
  for (const auto& [key, values] : c.grid_overrides) {
    std::vector<std::string> texts;
    for (const auto& v : values) texts.push_back(param_text(v));
    e.emplace_back("grid." + key, join(texts, '|'));
  }
  e.emplace_back("shap_background", std::to_string(c.shap_background));
  e.emplace_back("shap_instances", std::to_string(c.shap_instances));
  e.emplace_back("shap_permutations", std::to_string(c.shap_permutations));
  return e;
}

}  // namespace tabkit::app
