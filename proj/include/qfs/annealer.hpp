#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qfs/bitstring.hpp"
#include "qfs/qubo.hpp"
#include "qfs/selection.hpp"

namespace qfs {

/// Largest register the state-vector simulator accepts (2^26 amplitudes, 1 GiB).
inline constexpr int kMaxEvolutionQubits = 26;
/// Largest register for the exact-exponential reference propagator.
inline constexpr int kMaxExactStepQubits = 12;

enum class ScheduleKind { Linear };

/// H(s) = A(s) H_D + B(s) H_QUBO with s = t / tau, sampled on steps of ds.
/// Units are dimensionless with hbar = 1.
struct AnnealSchedule {
  double tau = 50.0;
  double ds = 0.01;
  ScheduleKind kind = ScheduleKind::Linear;

  /// Number of grid steps, round(1/ds). Throws if 1/ds is not an integer.
  int steps() const;
  void validate() const;

  double driver_weight(double s) const { return 1.0 - s; }
  double problem_weight(double s) const { return s; }
};

enum class EvolutionMethod { ExactStep, Trotter2 };

EvolutionMethod evolution_method_from_string(const std::string& text);

struct QuantumState {
  int d = 0;
  std::vector<std::complex<double>> amplitudes;

  double norm() const;
  std::vector<double> probabilities() const;
};

/// Uniform superposition over all 2^d assignments (ground state of H_D).
QuantumState init_state(int d);

/// <z|H_QUBO|z> for every basis index, built incrementally bit by bit.
std::vector<double> diagonal_energies(const QuboInstance& instance);

/// Matrix-free y = (a H_D + b diag) x with H_D = -sum_p sigma_x^(p).
template <typename T>
void apply_annealing_hamiltonian(int d, std::span<const double> diag, double a, double b,
                                 std::span<const T> x, std::span<T> y) {
  const std::uint64_t dim = std::uint64_t{1} << d;
  for (std::uint64_t i = 0; i < dim; ++i) {
    T flips{};
    for (int bit = 0; bit < d; ++bit) flips += x[i ^ (std::uint64_t{1} << bit)];
    y[i] = b * diag[i] * x[i] - a * flips;
  }
}

/// Evolves the uniform superposition through the schedule. Step k applies
/// exp(-i dt H(s_k)) with dt = tau*ds at the midpoint s_k = (k + 1/2) ds.
/// ExactStep exponentiates H(s_k) to machine precision (d <= 12); Trotter2 uses
/// the symmetric split driver/2 . problem . driver/2 and scales to d <= 26.
QuantumState evolve(const QuboInstance& instance, const AnnealSchedule& schedule, EvolutionMethod method);

/// Same, from an arbitrary normalized start state.
QuantumState evolve_from(QuantumState state, const QuboInstance& instance, const AnnealSchedule& schedule,
                         EvolutionMethod method);

/// n_shots = d^2, at least one shot.
std::int64_t auto_shots(int d);

/// i.i.d. measurements in the computational basis; deterministic given seed.
Histogram sample(const QuantumState& state, std::int64_t n_shots, std::uint64_t seed);

/// Most probable assignment, lowest numeric on exact ties.
Bitstring argmax_probability(const QuantumState& state);

/// Probability weight on the ground space of H_QUBO: all assignments within
/// 1e-10 of the minimum classical energy.
double fidelity(const QuantumState& state, const QuboInstance& instance);

enum class Readout { HistogramMode, ArgmaxProbability };

struct QaOptions {
  AnnealSchedule schedule;
  EvolutionMethod method = EvolutionMethod::Trotter2;
  std::optional<std::int64_t> shots;  // empty: d^2
  Readout readout = Readout::HistogramMode;
  std::uint64_t seed = 0;
};

/// Evolve, measure and report the selection with its fidelity.
SelectionResult quantum_anneal(const QuboInstance& instance, const QaOptions& options);

}  // namespace qfs
