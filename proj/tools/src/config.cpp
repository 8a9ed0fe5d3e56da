#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "harqerr/parallel.hpp"
#include "harqerr_cli/cli.hpp"

namespace harqerr::cli {

namespace {

using K = ParamKind;

std::vector<ParamSpec> with_universal(std::vector<ParamSpec> params, std::uint64_t trials,
                                      const std::string& trials_help) {
  params.insert(params.begin(),
                {
                    {"seed", K::UInt, kDefaultSeed, "master RNG seed"},
                    {"trials", K::UInt, trials, trials_help},
                    {"out", K::String, "", "CSV output path (default: $HARQERR_OUT_DIR/<experiment>.csv)"},
                    {"workers", K::UInt, 0, "worker threads, 0 = one per hardware thread"},
                });
  return params;
}

std::vector<ParamSpec> code_params() {
  return {
      {"message_bits", K::Int, 128, "message length N_b"},
      {"feedforward", K::String, "15", "feedforward polynomial, octal"},
      {"feedback", K::String, "13", "feedback polynomial, octal"},
  };
}

std::vector<ParamSpec> concat(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<ExperimentSpec> build() {
  std::vector<ExperimentSpec> v;
  v.push_back({"pep-sweep", "joint vs single pairwise error probability over the SNR ratio t",
               with_universal(
                   {
                       {"k", K::IntList, Json::array({2, 3}), "round counts"},
                       {"d", K::Double, 1.0, "Euclidean distance"},
                       {"snr1_db", K::Double, -3.0, "first-round SNR [dB]"},
                       {"t_min", K::Double, 0.1, "smallest SNR ratio t"},
                       {"t_max", K::Double, 100.0, "largest SNR ratio t"},
                       {"t_points", K::Int, 31, "log-spaced t points"},
                       {"t_values", K::DoubleList, Json::array(), "explicit t values (overrides the range)"},
                       {"panels", K::Int, 40, "quadrature panels per stage"},
                   },
                   0, "Monte Carlo samples per point for the oracle column (0 = off)")});
  v.push_back({"link-sim", "exact joint errors vs IE/DE models on the convolutional-code link",
               with_universal(concat(
                                  {
                                      {"k", K::Int, 2, "rounds"},
                                      {"prefix_db", K::DoubleList, Json::array({-1.0}),
                                       "SNRs of rounds 1..k-1 [dB]"},
                                      {"snr_db", K::DoubleList, Json::array({0.0, 1.0, 2.0, 3.0, 4.0, 5.0}),
                                       "accumulated SNR after round k [dB], one row each"},
                                      {"per_trials", K::UInt, 0, "trials per measured PER point (0 = trials)"},
                                  },
                                  code_params()),
                              10000, "link trials per point")});
  v.push_back({"fading-avg", "Rayleigh block-fading averages of the exact, DE and IE failure probabilities",
               with_universal(
                   concat(
                       {
                           {"k", K::IntList, Json::array({2, 3}), "round counts"},
                           {"avg_snr_db", K::DoubleList, Json::array({0.0, 2.0, 4.0, 6.0, 8.0, 10.0}),
                            "average per-round SNR [dB], one row per k each"},
                           {"per_model", K::String, "fit", "fit | measured | exponential | ideal | csv"},
                           {"per_threshold", K::Double, 1.0, "threshold (linear) for exponential/ideal"},
                           {"per_slope", K::Double, 1.0, "decay rate g for exponential"},
                           {"per_table", K::String, "", "snr_db,per CSV for per_model=csv"},
                           {"per_db_min", K::Double, -6.0, "measured PER grid start [dB]"},
                           {"per_db_max", K::Double, 8.0, "measured PER grid end [dB]"},
                           {"per_db_step", K::Double, 0.5, "measured PER grid step [dB]"},
                           {"per_trials", K::UInt, 20000, "trials per measured PER point"},
                           {"exact", K::Bool, true, "run the link-level exact average"},
                           {"link_trials", K::UInt, 50, "link trials per channel draw"},
                           {"ie_trials", K::UInt, 1000000, "Monte Carlo draws for the IE average"},
                       },
                       code_params()),
                   2000, "channel draws for the exact average")});
  v.push_back({"avg-rounds", "average HARQ round count with an exponential-threshold PER",
               with_universal(
                   {
                       {"avg_snr_db", K::DoubleList,
                        Json::array({0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0}),
                        "average per-round SNR [dB]"},
                       {"per_threshold", K::Double, 2.0, "PER threshold (linear)"},
                       {"per_slope", K::Double, 0.5, "PER decay rate g"},
                       {"series_tol", K::Double, 1e-12, "series truncation tolerance"},
                       {"max_rounds", K::Int, 1000, "round cap for the Monte Carlo column"},
                   },
                   0, "HARQ packets for the Monte Carlo column (0 = off)")});
  v.push_back({"fit-per", "measure (or load) a PER curve and fit the exponential-threshold model",
               with_universal(concat(
                                  {
                                      {"snr_db", K::DoubleList,
                                       Json::array({-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}),
                                       "SNR grid [dB]"},
                                      {"per_table", K::String, "", "fit this snr_db,per CSV instead of simulating"},
                                  },
                                  code_params()),
                              20000, "link trials per SNR point")});
  v.push_back({"sysgen", "sampled HARQ outcome streams for system-level simulation",
               with_universal(
                   {
                       {"model", K::String, "de", "error model: ie | de"},
                       {"per_model", K::String, "exponential", "exponential | ideal | csv"},
                       {"per_threshold", K::Double, 1.0, "PER threshold (linear)"},
                       {"per_slope", K::Double, 1.0, "PER decay rate g"},
                       {"per_table", K::String, "", "snr_db,per CSV for per_model=csv"},
                       {"channel", K::String, "rayleigh", "rayleigh | awgn"},
                       {"avg_snr_db", K::Double, 0.0, "average per-round SNR for rayleigh [dB]"},
                       {"round_snr_db", K::DoubleList, Json::array({0.0, 0.0, 0.0, 0.0}),
                        "per-round SNRs for awgn [dB]"},
                       {"k_max", K::Int, 4, "round limit"},
                   },
                   1000, "packets")});
  return v;
}

const char* kind_name(ParamKind k) {
  switch (k) {
    case K::Int: return "an integer";
    case K::UInt: return "a non-negative integer";
    case K::Double: return "a number";
    case K::Bool: return "a boolean";
    case K::String: return "a string";
    case K::IntList: return "an integer or list of integers";
    case K::DoubleList: return "a number or list of numbers";
  }
  return "?";
}

bool integral(const Json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9e15;
}

// Normalizes a JSON value to the parameter's type.
Json coerce(const ParamSpec& p, const Json& v) {
  auto bad = [&] { return ConfigError(p.key, std::string("expected ") + kind_name(p.kind)); };
  switch (p.kind) {
    case K::Int:
      if (!integral(v)) throw bad();
      return static_cast<std::int64_t>(v.get<double>());
    case K::UInt:
      if (!integral(v) || v.get<double>() < 0) throw bad();
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_number_integer()) return static_cast<std::uint64_t>(v.get<std::int64_t>());
      return static_cast<std::uint64_t>(v.get<double>());
    case K::Double:
      if (!v.is_number() || !std::isfinite(v.get<double>())) throw bad();
      return v.get<double>();
    case K::Bool:
      if (!v.is_boolean()) throw bad();
      return v;
    case K::String:
      if (!v.is_string()) throw bad();
      return v;
    case K::IntList:
    case K::DoubleList: {
      const Json arr = v.is_array() ? v : Json::array({v});
      Json out = Json::array();
      for (const Json& e : arr) {
        if (p.kind == K::IntList) {
          if (!integral(e)) throw bad();
          out.push_back(static_cast<std::int64_t>(e.get<double>()));
        } else {
          if (!e.is_number() || !std::isfinite(e.get<double>())) throw bad();
          out.push_back(e.get<double>());
        }
      }
      return out;
    }
  }
  throw bad();
}

double parse_double(const ParamSpec& p, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(p.key, "cannot parse '" + text + "' as a number");
  return v;
}

// Flag text -> JSON value of the parameter's type.
Json parse_flag(const ParamSpec& p, const std::string& text) {
  switch (p.kind) {
    case K::String:
      return text;
    case K::Bool:
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw ConfigError(p.key, "cannot parse '" + text + "' as a boolean");
    case K::IntList:
    case K::DoubleList: {
      Json arr = Json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        arr.push_back(parse_double(p, item));
      }
      return coerce(p, arr);
    }
    default:
      return coerce(p, parse_double(p, text));
  }
}

}  // namespace

const std::vector<ExperimentSpec>& experiments() {
  static const std::vector<ExperimentSpec> all = build();
  return all;
}

const ExperimentSpec& find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

ResolvedConfig resolve_config(const ExperimentSpec& spec, const Json& file,
                              const std::vector<std::pair<std::string, std::string>>& flags) {
  ResolvedConfig r;
  r.values = Json::object();
  r.sources = Json::object();
  for (const auto& p : spec.params) {
    r.values[p.key] = p.fallback;
    r.sources[p.key] = "default";
  }
  auto find = [&](const std::string& key) -> const ParamSpec* {
    for (const auto& p : spec.params)
      if (p.key == key) return &p;
    return nullptr;
  };

  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config", "top level must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "experiment") {
        if (!value.is_string() || value.get<std::string>() != spec.name)
          throw ConfigError("experiment", "config is for '" + value.dump() + "', not '" + spec.name + "'");
        continue;
      }
      const ParamSpec* p = find(key);
      if (!p) throw ConfigError(key, "unknown key for experiment '" + spec.name + "'");
      r.values[key] = coerce(*p, value);
      r.sources[key] = "config";
    }
  }
  for (const auto& [key, text] : flags) {
    const ParamSpec* p = find(key);
    if (!p) throw ConfigError(key, "unknown key for experiment '" + spec.name + "'");
    r.values[key] = parse_flag(*p, text);
    r.sources[key] = "flag";
  }
  return r;
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string to_csv(const Table& table) {
  std::string s;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) s += ',';
    s += table.columns[i];
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += row[i];
    }
    s += '\n';
  }
  return s;
}

OutputPaths resolve_outputs(const std::string& experiment, const std::string& out) {
  OutputPaths p;
  if (!out.empty()) {
    p.csv = out;
  } else {
    const char* dir = std::getenv(kOutDirEnv);
    p.csv = std::filesystem::path(dir && *dir ? dir : ".") / (experiment + ".csv");
  }
  p.report = p.csv;
  p.report.replace_filename(p.csv.stem().string() + ".report.json");
  return p;
}

}  // namespace harqerr::cli
