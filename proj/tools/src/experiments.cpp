#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <ostream>
#include <string>

#include "harqerr/conv_code.hpp"
#include "harqerr/error_models.hpp"
#include "harqerr/fading.hpp"
#include "harqerr/parallel.hpp"
#include "harqerr/pep.hpp"
#include "harqerr/per_models.hpp"
#include "harqerr/phy_sim.hpp"
#include "harqerr/special.hpp"
#include "harqerr_cli/cli.hpp"

namespace harqerr::cli {

namespace {

// Typed access to a resolved config.
struct Cfg {
  const Json& j;
  std::ostream* log;
  Json& linear;

  double num(const char* k) const { return j.at(k).get<double>(); }
  std::int64_t integer(const char* k) const { return j.at(k).get<std::int64_t>(); }
  std::uint64_t count(const char* k) const { return j.at(k).get<std::uint64_t>(); }
  bool flag(const char* k) const { return j.at(k).get<bool>(); }
  std::string str(const char* k) const { return j.at(k).get<std::string>(); }
  std::vector<double> nums(const char* k) const { return j.at(k).get<std::vector<double>>(); }
  std::vector<std::int64_t> ints(const char* k) const { return j.at(k).get<std::vector<std::int64_t>>(); }
  std::uint64_t seed() const { return count("seed"); }
  unsigned workers() const { return static_cast<unsigned>(count("workers")); }

  // dB inputs are converted here and nowhere else.
  double linear_of(const char* k) const {
    const double v = db_to_linear(num(k));
    linear[k] = v;
    if (log) *log << "harqerr: " << k << " = " << num(k) << " dB -> " << v << " (linear)\n";
    return v;
  }
  std::vector<double> linears_of(const char* k) const {
    std::vector<double> v;
    for (double db : nums(k)) v.push_back(db_to_linear(db));
    linear[k] = v;
    if (log) {
      *log << "harqerr: " << k << " (linear) =";
      for (double x : v) *log << ' ' << x;
      *log << '\n';
    }
    return v;
  }
  void note(const std::string& line) const {
    if (log) *log << "harqerr: " << line << '\n';
  }
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

std::string num(double v) { return format_number(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

unsigned parse_octal(const Cfg& c, const char* key) {
  const std::string s = c.str(key);
  require(!s.empty() && s.size() <= 5 && s.find_first_not_of("01234567") == std::string::npos, key,
          "expected an octal polynomial such as \"13\"");
  return static_cast<unsigned>(std::stoul(s, nullptr, 8));
}

CodeSpec code_from(const Cfg& c) {
  const auto nb = c.integer("message_bits");
  require(nb >= 1 && nb <= (1 << 20), "message_bits", "must be in [1, 1048576]");
  const unsigned ff = parse_octal(c, "feedforward"), fb = parse_octal(c, "feedback");
  try {
    return CodeSpec::rsc(ff, fb, static_cast<int>(nb));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("feedback", e.what());
  }
}

PerModel load_table(const Cfg& c) {
  const std::string path = c.str("per_table");
  require(!path.empty(), "per_table", "required when per_model is csv");
  std::vector<PerPoint> pts;
  try {
    pts = read_per_csv(std::filesystem::path(path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("per_table", e.what());
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  try {
    return PerModel::table(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("per_table", e.what());
  }
}

// Threshold-type PER model from per_threshold / per_slope.
PerModel threshold_model(const Cfg& c, bool exponential) {
  require(c.num("per_threshold") >= 0.0, "per_threshold", "must be >= 0");
  if (!exponential) return PerModel::ideal_threshold(c.num("per_threshold"));
  require(c.num("per_slope") > 0.0, "per_slope", "must be > 0");
  return PerModel::exponential_threshold(c.num("per_threshold"), c.num("per_slope"));
}

Json describe(const PerModel& m) {
  Json j;
  switch (m.variant()) {
    case PerVariant::IdealThreshold:
      j["variant"] = "ideal";
      j["threshold"] = m.snr_threshold();
      break;
    case PerVariant::ExponentialThreshold:
      j["variant"] = "exponential";
      j["threshold"] = m.snr_threshold();
      j["threshold_db"] = m.snr_threshold() > 0 ? linear_to_db(m.snr_threshold()) : -INFINITY;
      j["slope"] = m.slope();
      break;
    case PerVariant::Table:
      j["variant"] = "table";
      j["points"] = m.table_points().size();
      break;
  }
  return j;
}

// ---------------------------------------------------------------- pep-sweep

ExperimentResult pep_sweep(const Cfg& c) {
  ExperimentResult r;
  const auto ks = c.ints("k");
  require(!ks.empty(), "k", "must not be empty");
  for (auto k : ks) require(k >= 2 && k <= 8, "k", "round counts must be in [2, 8]");
  const double d = c.num("d");
  require(d > 0.0, "d", "must be > 0");
  std::vector<double> ts = c.nums("t_values");
  if (ts.empty()) {
    const double lo = c.num("t_min"), hi = c.num("t_max");
    const auto n = c.integer("t_points");
    require(lo > 0.0, "t_min", "must be > 0");
    require(hi >= lo, "t_max", "must be >= t_min");
    require(n >= 1 && n <= 10000, "t_points", "must be in [1, 10000]");
    for (std::int64_t i = 0; i < n; ++i)
      ts.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  for (double t : ts) require(t > 0.0, "t_values", "t values must be > 0");
  const auto panels = c.integer("panels");
  require(panels >= 1 && panels <= 2000, "panels", "must be in [1, 2000]");
  const double snr1 = c.linear_of("snr1_db");
  const std::uint64_t mc = c.count("trials");

  PepQuadratureOptions opt;
  opt.panels = static_cast<int>(panels);
  r.table.columns = {"k", "t", "snr_db", "p_joint", "p_single", "p_lower", "ratio"};
  if (mc > 0) {
    r.table.columns.push_back("p_joint_mc");
    r.table.columns.push_back("stderr_p_joint_mc");
  }
  bool sandwich = true;
  Json last = Json::array();
  std::uint64_t row_index = 0;
  for (auto k : ks) {
    c.note("pep-sweep k=" + std::to_string(k));
    const auto rows = sweep_ratio(static_cast<int>(k), d, snr1, ts, opt);
    for (const auto& row : rows) {
      double acc = 0.0, g = snr1;
      std::vector<double> sched;
      for (std::int64_t l = 0; l < k; ++l, g *= row.t) {
        acc += g;
        sched.push_back(g);
      }
      std::vector<std::string> cells{num(k),          num(row.t),     num(linear_to_db(acc)), num(row.joint),
                                     num(row.single), num(row.lower), num(row.ratio)};
      if (mc > 0) {
        const auto e = pep_joint_mc({d, SnrSchedule(sched)}, mc, derive_seed(c.seed(), row_index), c.workers());
        cells.push_back(num(e.value));
        cells.push_back(num(e.std_error));
      }
      sandwich = sandwich && row.ratio <= 1.0 + 1e-9 && row.ratio >= std::ldexp(1.0, -static_cast<int>(k - 1)) - 1e-9;
      r.table.rows.push_back(std::move(cells));
      ++row_index;
    }
    last.push_back({{"k", k}, {"t", rows.back().t}, {"ratio", rows.back().ratio}});
  }
  r.summary["rows"] = r.table.rows.size();
  r.summary["sandwich_holds"] = sandwich;
  r.summary["ratio_at_largest_t"] = last;
  return r;
}

// ----------------------------------------------------------------- link-sim

ExperimentResult link_sim(const Cfg& c) {
  ExperimentResult r;
  const auto k = c.integer("k");
  require(k >= 1 && k <= 16, "k", "must be in [1, 16]");
  const CodeSpec code = code_from(c);
  const auto prefix_db = c.nums("prefix_db");
  require(static_cast<std::int64_t>(prefix_db.size()) == k - 1, "prefix_db",
          "must list k-1 = " + std::to_string(k - 1) + " SNRs");
  require(!c.nums("snr_db").empty(), "snr_db", "must not be empty");
  const std::uint64_t trials = c.count("trials");
  require(trials >= 1, "trials", "must be >= 1");
  const std::uint64_t per_trials = c.count("per_trials") ? c.count("per_trials") : trials;
  const auto prefix = c.linears_of("prefix_db");
  const auto totals = c.linears_of("snr_db");
  double prefix_sum = 0.0;
  for (double g : prefix) prefix_sum += g;

  r.table.columns = {"snr_db",         "snr_last_db",  "f_exact",     "f_de",       "f_ie",   "f_half_de",
                     "stderr_f_exact", "stderr_f_de", "stderr_f_ie", "p_err_last"};
  int de_violations = 0, ie_under = 0;
  const auto dbs = c.nums("snr_db");
  for (std::size_t i = 0; i < totals.size(); ++i) {
    require(totals[i] >= prefix_sum * (1 - 1e-12), "snr_db",
            format_number(dbs[i]) + " dB is below the accumulated prefix SNR");
    std::vector<double> sched = prefix;
    sched.push_back(std::max(0.0, totals[i] - prefix_sum));
    c.note("link-sim point " + std::to_string(i + 1) + "/" + std::to_string(totals.size()));
    const auto cmp = compare_error_models(code, SnrSchedule(sched), trials, per_trials,
                                          derive_seed(c.seed(), i), c.workers());
    const std::size_t l = static_cast<std::size_t>(k - 1);
    const double f = cmp.exact.f_hat[l], sf = cmp.exact.f_hat_stderr[l];
    if (f > cmp.f_de[l] + 3 * std::hypot(sf, cmp.f_de_stderr[l])) ++de_violations;
    if (f > cmp.f_ie[l] + 3 * std::hypot(sf, cmp.f_ie_stderr[l])) ++ie_under;
    r.table.rows.push_back({num(dbs[i]), num(linear_to_db(sched.back())), num(f), num(cmp.f_de[l]),
                            num(cmp.f_ie[l]), num(0.5 * cmp.f_de[l]), num(sf), num(cmp.f_de_stderr[l]),
                            num(cmp.f_ie_stderr[l]), num(cmp.exact.marginal[l])});
  }
  r.summary["points"] = totals.size();
  r.summary["code"] = {{"message_bits", code.message_bits}, {"memory", code.memory}, {"rate", code.rate()}};
  r.summary["de_bound_violations_3sigma"] = de_violations;
  r.summary["ie_underestimates_3sigma"] = ie_under;
  return r;
}

// --------------------------------------------------------------- fading-avg

ExperimentResult fading_avg(const Cfg& c) {
  ExperimentResult r;
  const auto ks = c.ints("k");
  require(!ks.empty(), "k", "must not be empty");
  for (auto k : ks) require(k >= 1 && k <= 16, "k", "round counts must be in [1, 16]");
  require(!c.nums("avg_snr_db").empty(), "avg_snr_db", "must not be empty");
  const bool exact = c.flag("exact");
  const std::uint64_t channel = c.count("trials"), link = c.count("link_trials"), ie_n = c.count("ie_trials");
  require(!exact || channel >= 1, "trials", "must be >= 1");
  require(!exact || link >= 1, "link_trials", "must be >= 1");
  require(ie_n >= 1, "ie_trials", "must be >= 1");
  const std::string kind = c.str("per_model");
  require(kind == "fit" || kind == "measured" || kind == "exponential" || kind == "ideal" || kind == "csv",
          "per_model", "expected fit, measured, exponential, ideal or csv");
  const bool needs_code = exact || kind == "fit" || kind == "measured";
  const CodeSpec code = needs_code ? code_from(c) : CodeSpec{};

  std::optional<PerModel> per;
  if (kind == "fit" || kind == "measured") {
    const double lo = c.num("per_db_min"), hi = c.num("per_db_max"), step = c.num("per_db_step");
    require(step > 0.0, "per_db_step", "must be > 0");
    require(hi > lo, "per_db_max", "must be > per_db_min");
    require((hi - lo) / step <= 2000, "per_db_step", "grid has more than 2000 points");
    require(c.count("per_trials") >= 1, "per_trials", "must be >= 1");
    std::vector<double> grid_db, grid;
    for (int i = 0; lo + i * step <= hi + 1e-9 * step; ++i) grid_db.push_back(lo + i * step);
    for (double db : grid_db) grid.push_back(db_to_linear(db));
    c.linear["per_grid_db"] = grid;
    c.note("measuring the single-round PER curve (" + std::to_string(grid.size()) + " points)");
    const auto curve = measure_per_curve(code, grid, c.count("per_trials"), derive_seed(c.seed(), 7), c.workers());
    std::vector<PerPoint> pts;
    double running = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      running = std::min(running, curve[i].value);
      pts.push_back({grid[i], running});
    }
    if (kind == "measured") {
      per = PerModel::table(pts);
    } else {
      std::vector<PerPoint> positive;
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (curve[i].value > 0.0) positive.push_back({grid[i], curve[i].value});
      try {
        per = fit_exponential(positive);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("PER fit failed: ") + e.what());
      }
    }
  } else if (kind == "csv") {
    per = load_table(c);
  } else {
    per = threshold_model(c, kind == "exponential");
  }
  r.summary["per_model"] = describe(*per);

  const auto avgs = c.linears_of("avg_snr_db");
  const auto dbs = c.nums("avg_snr_db");
  const int kmax = static_cast<int>(*std::max_element(ks.begin(), ks.end()));
  r.table.columns = {"snr_db", "k"};
  if (exact) r.table.columns.insert(r.table.columns.end(), {"f_exact"});
  r.table.columns.insert(r.table.columns.end(), {"f_de", "f_ie"});
  if (exact) r.table.columns.push_back("stderr_f_exact");
  r.table.columns.push_back("stderr_f_ie");

  for (std::size_t i = 0; i < avgs.size(); ++i) {
    std::vector<McEstimate> ex;
    if (exact) {
      c.note("fading-avg exact average at " + format_number(dbs[i]) + " dB");
      ex = avg_failure_exact_mc_all(code, kmax, avgs[i], channel, link, derive_seed(c.seed(), 1000 + i), c.workers());
    }
    for (auto k : ks) {
      const int kk = static_cast<int>(k);
      const double de = per->variant() == PerVariant::ExponentialThreshold
                            ? avg_failure_de_closed(per->snr_threshold(), per->slope(), kk, avgs[i])
                            : avg_failure_de_numeric(*per, kk, avgs[i]);
      const auto ie = avg_failure_ie_mc(*per, kk, avgs[i], ie_n, derive_seed(c.seed(), 100000 + 64 * i + kk), c.workers());
      std::vector<std::string> row{num(dbs[i]), num(k)};
      if (exact) row.push_back(num(ex[kk - 1].value));
      row.push_back(num(de));
      row.push_back(num(ie.value));
      if (exact) row.push_back(num(ex[kk - 1].std_error));
      row.push_back(num(ie.std_error));
      r.table.rows.push_back(std::move(row));
    }
  }
  r.summary["rows"] = r.table.rows.size();
  return r;
}

// --------------------------------------------------------------- avg-rounds

ExperimentResult avg_rounds_exp(const Cfg& c) {
  ExperimentResult r;
  const PerModel per = threshold_model(c, true);
  const double tol = c.num("series_tol");
  require(tol > 0.0 && tol < 1.0, "series_tol", "must be in (0, 1)");
  const auto cap = c.integer("max_rounds");
  require(cap >= 1 && cap <= 1000000, "max_rounds", "must be in [1, 1000000]");
  require(!c.nums("avg_snr_db").empty(), "avg_snr_db", "must not be empty");
  const auto avgs = c.linears_of("avg_snr_db");
  const auto dbs = c.nums("avg_snr_db");
  const std::uint64_t mc = c.count("trials");
  r.table.columns = {"snr_db", "k_bar", "k_bar_series", "series_terms"};
  if (mc > 0) r.table.columns.insert(r.table.columns.end(), {"k_bar_mc", "stderr_k_bar_mc"});
  double worst = 0.0;
  for (std::size_t i = 0; i < avgs.size(); ++i) {
    const double kb = avg_rounds(per.snr_threshold(), per.slope(), avgs[i]);
    const auto s = avg_rounds_series(per.snr_threshold(), per.slope(), avgs[i], tol);
    worst = std::max(worst, std::abs(kb - s.value));
    std::vector<std::string> row{num(dbs[i]), num(kb), num(s.value), num(s.terms)};
    if (mc > 0) {
      const auto e = avg_rounds_mc(per, avgs[i], mc, derive_seed(c.seed(), i), static_cast<int>(cap), c.workers());
      row.push_back(num(e.value));
      row.push_back(num(e.std_error));
    }
    r.table.rows.push_back(std::move(row));
  }
  r.summary["rows"] = r.table.rows.size();
  r.summary["max_abs_formula_minus_series"] = worst;
  return r;
}

// ------------------------------------------------------------------ fit-per

ExperimentResult fit_per(const Cfg& c) {
  ExperimentResult r;
  std::vector<PerPoint> pts;
  std::vector<double> stderr_per, dbs;
  if (!c.str("per_table").empty()) {
    try {
      pts = read_per_csv(std::filesystem::path(c.str("per_table")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("per_table", e.what());
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    r.summary["source"] = "csv";
  } else {
    const CodeSpec code = code_from(c);
    require(!c.nums("snr_db").empty(), "snr_db", "must not be empty");
    require(c.count("trials") >= 1, "trials", "must be >= 1");
    const auto grid = c.linears_of("snr_db");
    dbs = c.nums("snr_db");
    c.note("measuring " + std::to_string(grid.size()) + " PER points");
    const auto curve = measure_per_curve(code, grid, c.count("trials"), c.seed(), c.workers());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      pts.push_back({grid[i], curve[i].value});
      stderr_per.push_back(curve[i].std_error);
    }
    r.summary["source"] = "link simulation";
  }
  std::vector<PerPoint> usable;
  for (const auto& p : pts)
    if (p.per > 0.0) usable.push_back(p);
  PerModel model = PerModel::ideal_threshold(0.0);
  try {
    model = fit_exponential(usable);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("PER fit failed: ") + e.what());
  }
  r.table.columns = {"snr_db", "per", "stderr_per", "per_fit", "log_residual"};
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double fit = model(pts[i].snr);
    std::string res;
    if (pts[i].per > 0.0) {
      const double lr = std::log(fit) - std::log(pts[i].per);
      res = num(lr);
      if (pts[i].per < 1.0 - 1e-12) worst = std::max(worst, std::abs(lr));
    }
    r.table.rows.push_back({num(dbs.empty() ? linear_to_db(pts[i].snr) : dbs[i]), num(pts[i].per),
                            stderr_per.empty() ? std::string() : num(stderr_per[i]), num(fit), res});
  }
  r.summary["per_model"] = describe(model);
  r.summary["fit_points"] = usable.size();
  r.summary["excluded_zero_points"] = pts.size() - usable.size();
  r.summary["max_abs_log_residual"] = worst;
  return r;
}

// ------------------------------------------------------------------- sysgen

ExperimentResult sysgen(const Cfg& c) {
  ExperimentResult r;
  ModelKind kind;
  try {
    kind = parse_model_kind(c.str("model"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  const std::string pm = c.str("per_model");
  require(pm == "exponential" || pm == "ideal" || pm == "csv", "per_model", "expected exponential, ideal or csv");
  const PerModel per = pm == "csv" ? load_table(c) : threshold_model(c, pm == "exponential");
  const std::string channel = c.str("channel");
  require(channel == "rayleigh" || channel == "awgn", "channel", "expected rayleigh or awgn");
  const auto k_max = c.integer("k_max");
  require(k_max >= 1 && k_max <= 10000, "k_max", "must be in [1, 10000]");
  const std::uint64_t packets = c.count("trials");
  require(packets >= 1, "trials", "must be >= 1");
  const auto kk = static_cast<std::size_t>(k_max);

  std::vector<double> fixed;
  double avg = 0.0;
  if (channel == "awgn") {
    require(c.nums("round_snr_db").size() >= kk, "round_snr_db", "must list at least k_max SNRs");
    fixed = c.linears_of("round_snr_db");
    fixed.resize(kk);
  } else {
    avg = c.linear_of("avg_snr_db");
  }

  r.table.columns = {"packet", "rounds_used", "delivered", "error_flags", "acc_snr_db"};
  std::vector<std::uint64_t> nack(kk, 0);
  std::uint64_t delivered = 0, rounds = 0;
  for (std::uint64_t p = 0; p < packets; ++p) {
    std::vector<double> snrs = fixed;
    if (channel == "rayleigh") {
      Engine e = make_engine(c.seed(), 2 * p);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      snrs.resize(kk);
      for (double& s : snrs) s = -avg * std::log1p(-u(e));
    }
    const SnrSchedule sched(snrs);
    const auto o = sample_error_sequence(kind, per, sched, static_cast<int>(k_max), derive_seed(c.seed(), 2 * p + 1));
    std::string flags;
    for (bool f : o.error_flags) flags += f ? '1' : '0';
    for (std::size_t l = 0; l < o.error_flags.size(); ++l)
      if (o.error_flags[l]) ++nack[l];
    delivered += o.delivered;
    rounds += static_cast<std::uint64_t>(o.rounds_used);
    const double acc = sched.accumulated(static_cast<std::size_t>(o.rounds_used - 1));
    r.table.rows.push_back({num(p), num(o.rounds_used), o.delivered ? "1" : "0", flags, num(linear_to_db(acc))});
  }
  const double n = static_cast<double>(packets);
  r.summary["packets"] = packets;
  r.summary["delivered_fraction"] = delivered / n;
  r.summary["mean_rounds"] = rounds / n;
  Json rates = Json::array();
  for (std::size_t l = 0; l < kk; ++l) rates.push_back(nack[l] / n);
  r.summary["nack_rate"] = rates;
  if (channel == "awgn") {
    Json model = Json::array();
    for (std::size_t l = 1; l <= kk; ++l) model.push_back(failure_prob(kind, per, SnrSchedule(fixed).prefix(l)));
    r.summary["model_failure_prob"] = model;
  }
  r.summary["per_model"] = describe(per);
  return r;
}

}  // namespace

ExperimentResult run_experiment(const std::string& name, const Json& config, std::ostream* log) {
  Json linear = Json::object();
  const Cfg c{config, log, linear};
  ExperimentResult r;
  if (name == "pep-sweep") r = pep_sweep(c);
  else if (name == "link-sim") r = link_sim(c);
  else if (name == "fading-avg") r = fading_avg(c);
  else if (name == "avg-rounds") r = avg_rounds_exp(c);
  else if (name == "fit-per") r = fit_per(c);
  else if (name == "sysgen") r = sysgen(c);
  else throw ConfigError("experiment", "unknown experiment '" + name + "'");
  r.linear_inputs = std::move(linear);
  return r;
}

}  // namespace harqerr::cli
