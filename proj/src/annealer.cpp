#include "qfs/annealer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qfs/errors.hpp"

namespace qfs {

using cplx = std::complex<double>;

int AnnealSchedule::steps() const {
  const double n = 1.0 / ds;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("1/ds must be an integer number of steps, got ds = " + std::to_string(ds));
  }
  return static_cast<int>(rounded);
}

void AnnealSchedule::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be finite and >= 0");
  if (!(ds > 0.0 && ds <= 1.0)) throw std::invalid_argument("ds must lie in (0,1]");
  steps();
}

EvolutionMethod evolution_method_from_string(const std::string& text) {
  if (text == "trotter2") return EvolutionMethod::Trotter2;
  if (text == "exact_step" || text == "exact-step") return EvolutionMethod::ExactStep;
  throw std::invalid_argument("unknown evolution method '" + text + "'");
}

double QuantumState::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

std::vector<double> QuantumState::probabilities() const {
  std::vector<double> p(amplitudes.size());
  std::transform(amplitudes.begin(), amplitudes.end(), p.begin(), [](const cplx& a) { return std::norm(a); });
  return p;
}

QuantumState init_state(int d) {
  if (d < 1 || d > kMaxEvolutionQubits) {
    throw CapacityError("register of " + std::to_string(d) + " qubits outside [1, " +
                        std::to_string(kMaxEvolutionQubits) + "]");
  }
  const std::uint64_t dim = std::uint64_t{1} << d;
  return QuantumState{d, std::vector<cplx>(dim, cplx(std::pow(2.0, -0.5 * d), 0.0))};
}

std::vector<double> diagonal_energies(const QuboInstance& instance) {
  const int d = instance.d;
  if (d > kMaxEvolutionQubits) throw CapacityError("diagonal of " + std::to_string(d) + " variables too large");
  const std::uint64_t dim = std::uint64_t{1} << d;
  std::vector<double> diag(dim, 0.0);
  const double w_quad = 1.0 - instance.beta;
  for (std::uint64_t i = 1; i < dim; ++i) {
    // Peel off the lowest set bit; it belongs to variable p = d - 1 - bit.
    const int bit = std::countr_zero(i);
    const int p = d - 1 - bit;
    const std::uint64_t rest = i & (i - 1);
    double coupling = 0.0;
    for (std::uint64_t r = rest; r; r &= r - 1) coupling += instance.J(p, d - 1 - std::countr_zero(r));
    diag[i] = diag[rest] - instance.beta * instance.h[p] + w_quad * coupling;
  }
  return diag;
}

namespace {

void check_register(const QuboInstance& instance, EvolutionMethod method) {
  const int cap = method == EvolutionMethod::ExactStep ? kMaxExactStepQubits : kMaxEvolutionQubits;
  if (instance.d < 1 || instance.d > cap) {
    throw CapacityError("d = " + std::to_string(instance.d) + " outside the simulator range [1, " +
                        std::to_string(cap) + "]");
  }
}

// exp(+i theta sigma_x) on every qubit.
void driver_rotation(std::vector<cplx>& psi, int d, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const cplx is(0.0, s);
  const std::uint64_t dim = psi.size();
  for (int bit = 0; bit < d; ++bit) {
    const std::uint64_t mask = std::uint64_t{1} << bit;
    for (std::uint64_t i = 0; i < dim; ++i) {
      if (i & mask) continue;
      const cplx a0 = psi[i], a1 = psi[i | mask];
      psi[i] = c * a0 + is * a1;
      psi[i | mask] = is * a0 + c * a1;
    }
  }
}

// psi <- exp(-i dt H) psi by a scaled Taylor series, accurate to rounding.
void exact_propagate(std::vector<cplx>& psi, int d, std::span<const double> diag, double a, double b, double dt,
                     double diag_bound) {
  const double bound = std::abs(a) * d + std::abs(b) * diag_bound;
  const int substeps = std::max(1, static_cast<int>(std::ceil(bound * dt / 0.5)));
  const double h = dt / substeps;
  std::vector<cplx> term(psi.size()), next(psi.size());
  for (int sub = 0; sub < substeps; ++sub) {
    term = psi;
    for (int k = 1; k < 64; ++k) {
      apply_annealing_hamiltonian<cplx>(d, diag, a, b, term, next);
      const cplx factor(0.0, -h / k);
      double term_norm = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) {
        term[i] = factor * next[i];
        psi[i] += term[i];
        term_norm += std::norm(term[i]);
      }
      if (std::sqrt(term_norm) < 1e-17) break;
    }
  }
}

}  // namespace

QuantumState evolve_from(QuantumState state, const QuboInstance& instance, const AnnealSchedule& schedule,
                         EvolutionMethod method) {
  schedule.validate();
  check_register(instance, method);
  if (state.d != instance.d) throw std::invalid_argument("state and instance dimension differ");

  const int d = instance.d;
  const auto diag = diagonal_energies(instance);
  const int n = schedule.steps();
  const double dt = schedule.tau * schedule.ds;
  if (dt == 0.0) return state;

  double diag_bound = 0.0;
  for (double e : diag) diag_bound = std::max(diag_bound, std::abs(e));

  auto& psi = state.amplitudes;
  for (int k = 0; k < n; ++k) {
    const double s = (k + 0.5) * schedule.ds;
    const double a = schedule.driver_weight(s), b = schedule.problem_weight(s);
    if (method == EvolutionMethod::ExactStep) {
      exact_propagate(psi, d, diag, a, b, dt, diag_bound);
    } else {
      driver_rotation(psi, d, 0.5 * a * dt);
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -dt * b * diag[i]);
      driver_rotation(psi, d, 0.5 * a * dt);
    }
  }
  return state;
}

QuantumState evolve(const QuboInstance& instance, const AnnealSchedule& schedule, EvolutionMethod method) {
  check_register(instance, method);
  return evolve_from(init_state(instance.d), instance, schedule, method);
}

std::int64_t auto_shots(int d) { return std::max<std::int64_t>(1, static_cast<std::int64_t>(d) * d); }

Histogram sample(const QuantumState& state, std::int64_t n_shots, std::uint64_t seed) {
  if (n_shots < 1) throw std::invalid_argument("n_shots must be >= 1");
  std::vector<double> cumulative(state.amplitudes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    total += std::norm(state.amplitudes[i]);
    cumulative[i] = total;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t last_nonzero = 0;
  for (std::uint64_t i = 0; i < state.amplitudes.size(); ++i) {
    if (std::norm(state.amplitudes[i]) > 0.0) last_nonzero = i;
  }
  Histogram histogram;
  for (std::int64_t shot = 0; shot < n_shots; ++shot) {
    // The first cumulative value above u always sits on a nonzero entry.
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unit(rng) * total);
    const auto index = it == cumulative.end() ? last_nonzero : static_cast<std::uint64_t>(it - cumulative.begin());
    ++histogram[bitstring_from_index(index, state.d)];
  }
  return histogram;
}

Bitstring argmax_probability(const QuantumState& state) {
  std::uint64_t best = 0;
  double best_p = -1.0;
  for (std::uint64_t i = 0; i < state.amplitudes.size(); ++i) {
    const double p = std::norm(state.amplitudes[i]);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }
  return bitstring_from_index(best, state.d);
}

double fidelity(const QuantumState& state, const QuboInstance& instance) {
  if (state.d != instance.d) throw std::invalid_argument("state and instance dimension differ");
  const auto diag = diagonal_energies(instance);
  const double e_min = *std::min_element(diag.begin(), diag.end());
  double f = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] <= e_min + 1e-10) f += std::norm(state.amplitudes[i]);
  }
  return std::clamp(f, 0.0, 1.0);
}

SelectionResult quantum_anneal(const QuboInstance& instance, const QaOptions& options) {
  const auto state = evolve(instance, options.schedule, options.method);
  SelectionResult r;
  r.image_id = instance.image_id;
  r.class_label = instance.class_label;
  r.method = SolveMethod::Qa;
  r.n_shots = options.shots.value_or(auto_shots(instance.d));
  r.histogram = sample(state, r.n_shots, options.seed);
  r.bitstring = options.readout == Readout::ArgmaxProbability ? argmax_probability(state)
                                                                : histogram_mode(r.histogram);
  r.selected_fm_indices = selected_indices(instance, r.bitstring);
  r.energy = energy(instance, r.bitstring);
  r.fidelity = fidelity(state, instance);
  return r;
}

}  // namespace qfs
