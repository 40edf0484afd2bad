#include "zeno/run_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "zeno/error.hpp"
#include "zeno/run_law.hpp"

namespace zeno {

P01Estimate estimate_p01(std::span<const Outcome> outcomes) {
  P01Estimate est;
  for (std::size_t k = 0; k + 1 < outcomes.size(); ++k) {
    if (outcomes[k] != Outcome::On) continue;
    ++est.on_events;
    if (outcomes[k + 1] == Outcome::Off) ++est.transitions;
  }
  if (est.on_events == 0) {
    throw Error(ErrorKind::NoOnEvents, "no On result with a successor; excitation probability undefined");
  }
  const double n = static_cast<double>(est.on_events);
  est.value = static_cast<double>(est.transitions) / n;
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / n);
  return est;
}

std::size_t RunLengthHistogram::count(Outcome o, std::size_t q) const noexcept {
  const auto& c = counts(o);
  const auto it = c.find(q);
  return it == c.end() ? 0 : it->second;
}

std::size_t RunLengthHistogram::runs(Outcome o) const noexcept {
  std::size_t total = 0;
  for (const auto& [q, c] : counts(o)) total += c;
  return total;
}

std::size_t RunLengthHistogram::max_run(Outcome o) const noexcept {
  const auto& c = counts(o);
  return c.empty() ? 0 : c.rbegin()->first;
}

std::size_t RunLengthHistogram::max_run() const noexcept {
  return std::max(max_run(Outcome::On), max_run(Outcome::Off));
}

std::size_t RunLengthHistogram::covered() const noexcept {
  std::size_t total = 0;
  for (const auto& [q, c] : counts_on) total += q * c;
  for (const auto& [q, c] : counts_off) total += q * c;
  return total;
}

RunLengthHistogram& RunLengthHistogram::merge(const RunLengthHistogram& other) {
  n_measurements += other.n_measurements;
  for (const auto& [q, c] : other.counts_on) counts_on[q] += c;
  for (const auto& [q, c] : other.counts_off) counts_off[q] += c;
  return *this;
}

RunLengthHistogram run_length_histogram(std::span<const Outcome> outcomes) {
  RunLengthHistogram hist;
  hist.n_measurements = outcomes.size();
  std::size_t start = 0;
  for (std::size_t k = 1; k <= outcomes.size(); ++k) {
    if (k == outcomes.size() || outcomes[k] != outcomes[start]) {
      auto& target = outcomes[start] == Outcome::On ? hist.counts_on : hist.counts_off;
      ++target[k - start];
      start = k;
    }
  }
  return hist;
}

std::map<std::size_t, double> normalized_ratios(const RunLengthHistogram& hist, Outcome outcome) {
  const std::size_t unit = hist.count(outcome, 1);
  if (unit == 0) {
    throw Error(ErrorKind::NoUnitRuns, "no runs of length 1 for outcome '" + std::string(to_token(outcome)) + "'");
  }
  std::map<std::size_t, double> ratios;
  for (const auto& [q, c] : hist.counts(outcome)) {
    ratios[q] = static_cast<double>(c) / static_cast<double>(unit);
  }
  return ratios;
}

double ModelCurve::at(std::size_t q) const {
  if (q < 1 || q > values.size()) {
    throw Error(ErrorKind::InvalidArgument, "model curve evaluated outside 1..q_max");
  }
  return values[q - 1];
}

ModelCurve model_curve(Model model, double p_or_omega_tau, std::size_t n_measurements, std::size_t q_max) {
  if (q_max < 1) throw Error(ErrorKind::InvalidArgument, "q_max must be >= 1");
  if (n_measurements != 0 && q_max > n_measurements) {
    throw Error(ErrorKind::InvalidArgument, "q_max cannot exceed the record length");
  }
  if (model == Model::Zeno && !(p_or_omega_tau >= 0.0 && p_or_omega_tau <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "Zeno curve needs p in [0, 1]");
  }

  ModelCurve curve{model, p_or_omega_tau, n_measurements, std::vector<double>(q_max)};
  const double n = static_cast<double>(n_measurements);
  if (model == Model::Zeno) {
    double weight = 1.0;
    for (std::size_t q = 1; q <= q_max; ++q) {
      const double finite = n_measurements == 0 ? 1.0 : (n - static_cast<double>(q) + 1.0) / n;
      curve.values[q - 1] = weight * finite;
      weight *= p_or_omega_tau;
    }
  } else {
    const CoherentRunLaw law(p_or_omega_tau);
    for (std::size_t q = 1; q <= q_max; ++q) {
      const double finite = n_measurements == 0 ? 1.0 : (n - static_cast<double>(q) + 1.0) / n;
      curve.values[q - 1] = law.weight(q) * finite;
    }
  }
  return curve;
}

std::string_view to_token(Verdict v) noexcept {
  switch (v) {
    case Verdict::Zeno: return "zeno";
    case Verdict::Coherent: return "coherent";
    case Verdict::Undecided: return "undecided";
  }
  return "undecided";
}

double Discrimination::log_likelihood_ratio() const noexcept {
  return log_likelihood_zeno - log_likelihood_coherent;
}

Verdict Discrimination::verdict() const noexcept {
  const double llr = log_likelihood_ratio();
  if (llr > 0.0) return Verdict::Zeno;
  if (llr < 0.0) return Verdict::Coherent;
  return Verdict::Undecided;
}

Discrimination& Discrimination::operator+=(const Discrimination& other) noexcept {
  log_likelihood_zeno += other.log_likelihood_zeno;
  log_likelihood_coherent += other.log_likelihood_coherent;
  runs += other.runs;
  return *this;
}

namespace {

std::vector<double> normalized(const ModelCurve& curve) {
  double total = 0.0;
  for (double v : curve.values) total += v;
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "model curve has no probability mass");
  std::vector<double> out(curve.values);
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

Discrimination discriminate(const RunLengthHistogram& hist, const ModelCurve& zeno, const ModelCurve& coherent,
                            RunSelection selection) {
  std::vector<Outcome> outcomes;
  if (selection != RunSelection::Off) outcomes.push_back(Outcome::On);
  if (selection != RunSelection::On) outcomes.push_back(Outcome::Off);

  std::size_t longest = 0;
  for (Outcome o : outcomes) longest = std::max(longest, hist.max_run(o));
  if (longest > zeno.q_max() || longest > coherent.q_max()) {
    std::ostringstream msg;
    msg << "observed run of length " << longest << " beyond the model curves (q_max " << zeno.q_max() << ", "
        << coherent.q_max() << ")";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }

  const std::vector<double> pz = normalized(zeno);
  const std::vector<double> pc = normalized(coherent);
  const std::size_t span = std::max(pz.size(), pc.size());
  bool identical = true;
  for (std::size_t i = 0; i < span && identical; ++i) {
    const double a = i < pz.size() ? pz[i] : 0.0;
    const double b = i < pc.size() ? pc[i] : 0.0;
    identical = std::abs(a - b) <= 1e-12;
  }
  if (identical) throw Error(ErrorKind::DegenerateModels, "the two run-length laws coincide");

  Discrimination d;
  const double minus_inf = -std::numeric_limits<double>::infinity();
  for (Outcome o : outcomes) {
    for (const auto& [q, c] : hist.counts(o)) {
      const double count = static_cast<double>(c);
      const double lz = pz[q - 1] > 0.0 ? std::log(pz[q - 1]) : minus_inf;
      const double lc = pc[q - 1] > 0.0 ? std::log(pc[q - 1]) : minus_inf;
      if (lz == minus_inf && lc == minus_inf) {
        std::ostringstream msg;
        msg << "run of length " << q << " has zero probability under both models";
        throw Error(ErrorKind::ZeroLikelihoodBothModels, msg.str());
      }
      d.log_likelihood_zeno += count * lz;
      d.log_likelihood_coherent += count * lc;
      d.runs += c;
    }
  }
  if (d.log_likelihood_zeno == minus_inf && d.log_likelihood_coherent == minus_inf) {
    throw Error(ErrorKind::ZeroLikelihoodBothModels, "the observed runs are impossible under both models");
  }
  return d;
}

Discrimination discriminate_record(const RunLengthHistogram& hist, const ChainProbabilities& chain,
                                   double omega_tau) {
  const std::size_t n = hist.n_measurements;
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "empty record");
  const ModelCurve coherent = model_curve(Model::Coherent, omega_tau, n, n);
  Discrimination total;
  int degenerate = 0;
  for (const auto& [outcome, p, selection] : {std::tuple{Outcome::On, chain.p0, RunSelection::On},
                                              std::tuple{Outcome::Off, chain.p1, RunSelection::Off}}) {
    if (hist.runs(outcome) == 0) continue;
    try {
      total += discriminate(hist, model_curve(Model::Zeno, p, n, n), coherent, selection);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateModels) throw;
      ++degenerate;
    }
  }
  if (degenerate > 0 && total.runs == 0) {
    throw Error(ErrorKind::DegenerateModels, "the two run-length laws coincide for this record");
  }
  return total;
}

}  // namespace zeno
