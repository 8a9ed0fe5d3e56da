#include "harqerr/error_models.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <stdexcept>
#include <string>

#include "harqerr/parallel.hpp"

namespace harqerr {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::IndependentErrors ? "ie" : "de";
}

ModelKind parse_model_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ie" || lower == "independent") return ModelKind::IndependentErrors;
  if (lower == "de" || lower == "deterministic") return ModelKind::DeterministicErrors;
  throw std::invalid_argument("unknown error model '" + std::string(text) + "' (expected ie or de)");
}

namespace {

// Conditional error probability at round index l (0-based), given the
// accumulated SNRs of rounds 0..l.
double cond_at(ModelKind kind, const PerModel& per, const SnrSchedule& sched, std::size_t l) {
  const double current = per(sched.accumulated(l));
  if (l == 0 || kind == ModelKind::IndependentErrors) return current;
  const double previous = per(sched.accumulated(l - 1));
  if (previous == 0.0) return 0.0;
  return std::clamp(current / previous, 0.0, 1.0);
}

}  // namespace

double failure_prob(ModelKind kind, const PerModel& per, const SnrSchedule& sched) {
  if (kind == ModelKind::DeterministicErrors) return per(sched.total());
  double f = 1.0;
  for (double acc : sched.accumulated()) f *= per(acc);
  return std::clamp(f, 0.0, 1.0);
}

double cond_error_prob(ModelKind kind, const PerModel& per, const SnrSchedule& sched) {
  return cond_at(kind, per, sched, sched.rounds() - 1);
}

HarqOutcome sample_error_sequence(ModelKind kind, const PerModel& per, const SnrSchedule& sched,
                                  int k_max, std::uint64_t seed) {
  if (k_max < 1) throw std::invalid_argument("sample_error_sequence: k_max must be >= 1");
  if (sched.rounds() < static_cast<std::size_t>(k_max))
    throw std::invalid_argument("sample_error_sequence: schedule shorter than k_max");

  Engine engine = make_engine(seed, 0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  HarqOutcome out;
  for (int l = 0; l < k_max; ++l) {
    const bool error = uniform(engine) < cond_at(kind, per, sched, static_cast<std::size_t>(l));
    out.error_flags.push_back(error);
    out.rounds_used = l + 1;
    if (!error) {
      out.delivered = true;
      break;
    }
  }
  return out;
}

}  // namespace harqerr
