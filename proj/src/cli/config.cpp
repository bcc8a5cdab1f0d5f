#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "hdpca/cli.hpp"
#include "hdpca/io.hpp"

namespace hdpca::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view text) {
  T v{};
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InputError("config: " + std::string(key) + ": expected an integer, got '" +
                     std::string(t) + "'");
  }
  return v;
}

double parse_real(std::string_view key, std::string_view text) {
  double v = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InputError("config: " + std::string(key) + ": expected a number, got '" +
                     std::string(t) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

std::vector<Index> parse_index_list(std::string_view text) {
  std::vector<Index> out;
  for (auto part : split_commas(text)) {
    if (part.empty()) throw InputError("config: empty entry in list '" + std::string(text) + "'");
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_integer<Index>("n_values", part));
      continue;
    }
    const auto lo = parse_integer<Index>("n_values", part.substr(0, dots));
    const auto hi = parse_integer<Index>("n_values", part.substr(dots + 2));
    if (hi < lo) throw InputError("config: empty range '" + std::string(part) + "'");
    for (Index v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::vector<EstimatorSpec> all_estimators() {
  std::vector<EstimatorSpec> out;
  for (Method m : kEstimatorMethods) out.push_back(EstimatorSpec{m});
  return out;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                  : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (!kv.emplace(key, value).second) {
      throw InputError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
  }

  ExperimentConfig cfg = std::move(base);
  std::optional<PdcNormalization> normalization;
  std::optional<double> epsilon;
  std::map<Method, ScalerScope> scopes;

  for (const auto& [key, value] : kv) {
    if (key == "p") {
      cfg.p = parse_integer<Index>(key, value);
    } else if (key == "n_values") {
      cfg.n_values = parse_index_list(value);
    } else if (key == "m") {
      cfg.m = parse_integer<Index>(key, value);
    } else if (key == "estimators") {
      cfg.estimators.clear();
      for (auto name : split_commas(value)) {
        const auto method = parse_method(name);
        if (!method || *method == Method::Pop) {
          throw InputError("config: estimators: unknown method '" + std::string(name) + "'");
        }
        cfg.estimators.push_back(EstimatorSpec{*method});
      }
    } else if (key == "master_seed") {
      cfg.master_seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "sigma_seed") {
      cfg.sigma_seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "data_source") {
      if (value == "synthetic") {
        cfg.data_source.kind = DataSource::Kind::Synthetic;
        cfg.data_source.path.clear();
      } else if (value.rfind("file:", 0) == 0 && value.size() > 5) {
        cfg.data_source.kind = DataSource::Kind::File;
        cfg.data_source.path = value.substr(5);
      } else {
        throw InputError("config: data_source must be 'synthetic' or 'file:PATH'");
      }
    } else if (key == "pcs_reported") {
      cfg.pcs_reported = parse_integer<Index>(key, value);
    } else if (key == "sigma_entries") {
      if (value == "uniform") cfg.sigma_entries = SigmaEntries::Uniform;
      else if (value == "normal") cfg.sigma_entries = SigmaEntries::Normal;
      else throw InputError("config: sigma_entries must be 'uniform' or 'normal'");
    } else if (key == "pdc_normalization") {
      if (value == "LISTING") normalization = PdcNormalization::Listing;
      else if (value == "EQ1") normalization = PdcNormalization::Eq1;
      else throw InputError("config: pdc_normalization must be LISTING or EQ1");
    } else if (key == "epsilon_floor") {
      epsilon = parse_real(key, value);
      if (!(*epsilon > 0)) throw InputError("config: epsilon_floor must be positive");
    } else if (key == "delimiter") {
      if (value == "tab") cfg.data_source.delimiter = '\t';
      else if (value == "comma") cfg.data_source.delimiter = ',';
      else if (value == "auto") cfg.data_source.delimiter.reset();
      else throw InputError("config: delimiter must be tab, comma or auto");
    } else if (key.rfind("scope.", 0) == 0) {
      const auto method = parse_method(key.substr(6));
      if (!method || !is_pdc_family(*method) || *method == Method::Pdc) {
        throw InputError("config: '" + key + "' does not name a scaled PDC method");
      }
      const auto scope = parse_scaler_scope(value);
      if (!scope) throw InputError("config: " + key + ": unknown scope '" + value + "'");
      scopes[*method] = *scope;
    } else {
      throw InputError("config: unknown key '" + key + "'");
    }
  }

  for (auto& e : cfg.estimators) {
    if (normalization) e.normalization = *normalization;
    if (epsilon) e.epsilon_floor = *epsilon;
    if (auto it = scopes.find(e.method); it != scopes.end()) e.scope = it->second;
  }
  return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "p = " << cfg.p << '\n';
  out << "n_values = ";
  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) out << (i ? "," : "") << cfg.n_values[i];
  out << '\n';
  out << "m = " << cfg.m << '\n';
  out << "estimators = ";
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    out << (i ? "," : "") << to_string(cfg.estimators[i].method);
  }
  out << '\n';
  out << "master_seed = " << cfg.master_seed << '\n';
  out << "sigma_seed = " << cfg.sigma_seed << '\n';
  if (cfg.data_source.kind == DataSource::Kind::File) {
    out << "data_source = file:" << cfg.data_source.path << '\n';
  } else {
    out << "data_source = synthetic\n";
  }
  out << "delimiter = "
      << (!cfg.data_source.delimiter ? "auto" : *cfg.data_source.delimiter == '\t' ? "tab" : "comma")
      << '\n';
  out << "pcs_reported = " << cfg.pcs_reported << '\n';
  out << "sigma_entries = " << to_string(cfg.sigma_entries) << '\n';

  // Normalisation and epsilon are shared by all estimators in a config file.
  PdcNormalization norm = PdcNormalization::Listing;
  double eps = ScalerSpec{}.epsilon_floor;
  for (const auto& e : cfg.estimators) {
    if (is_pdc_family(e.method)) {
      norm = e.normalization;
      if (e.epsilon_floor) eps = *e.epsilon_floor;
    }
  }
  out << "pdc_normalization = " << to_string(norm) << '\n';
  out << "epsilon_floor = " << format_number(eps) << '\n';
  for (const auto& e : cfg.estimators) {
    if (e.scope) out << "scope." << to_string(e.method) << " = " << to_string(*e.scope) << '\n';
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hdpca::cli
