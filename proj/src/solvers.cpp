#include "qfs/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qfs/errors.hpp"

namespace qfs {

BruteForceResult brute_force(const QuboInstance& instance) {
  const int d = instance.d;
  if (d > kMaxBruteForceVariables) {
    throw CapacityError("brute force limited to d <= " + std::to_string(kMaxBruteForceVariables));
  }
  const double w_quad = 1.0 - instance.beta;
  // Gray-code walk: variable p flips at step t when bit p is the lowest set bit
  // of t. local[p] tracks sum_q J_pq z_q.
  std::vector<double> local(d, 0.0);
  Bitstring z(d, 0);
  const std::uint64_t count = std::uint64_t{1} << d;
  std::vector<double> energies(count);
  double e = 0.0;
  energies[0] = 0.0;
  for (std::uint64_t t = 1; t < count; ++t) {
    const int p = std::countr_zero(t);
    const double sign = z[p] ? -1.0 : 1.0;
    e += sign * (w_quad * local[p] - instance.beta * instance.h[p]);
    z[p] ^= 1;
    for (int q = 0; q < d; ++q) {
      if (q != p) local[q] += sign * instance.J(q, p);
    }
    energies[basis_index(z)] = e;
  }

  const double e_min = *std::min_element(energies.begin(), energies.end());
  BruteForceResult out;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (energies[i] <= e_min + 1e-10) {
      ++out.degeneracy;
      if (out.ties.size() < 16) out.ties.push_back(bitstring_from_index(i, d));
    } else if (!out.next_energy || energies[i] < *out.next_energy) {
      out.next_energy = energies[i];
    }
  }
  auto& sel = out.selection;
  sel.image_id = instance.image_id;
  sel.class_label = instance.class_label;
  sel.method = SolveMethod::Exact;
  sel.bitstring = out.ties.front();
  sel.selected_fm_indices = selected_indices(instance, sel.bitstring);
  sel.energy = energy(instance, sel.bitstring);
  sel.histogram[sel.bitstring] = 1;
  sel.n_shots = 1;
  sel.degeneracy = out.degeneracy;
  return out;
}

void SaParams::validate() const {
  if (num_reads < 1 || num_sweeps < 1 || sweeps_per_beta < 1) {
    throw std::invalid_argument("SA: reads, sweeps and sweeps_per_beta must be >= 1");
  }
  if (beta_range && !(beta_range->first < beta_range->second && beta_range->first >= 0.0)) {
    throw std::invalid_argument("SA: beta_range must satisfy 0 <= low < high");
  }
}

std::pair<double, double> default_beta_range(const QuboInstance& instance) {
  double scale = 0.0;
  for (double h : instance.h) scale = std::max(scale, std::abs(h));
  for (int p = 0; p < instance.d; ++p) {
    for (int q = p + 1; q < instance.d; ++q) scale = std::max(scale, std::abs(instance.J(p, q)));
  }
  if (scale == 0.0) scale = 1.0;
  return {0.1 / scale, 10.0 / scale};
}

SelectionResult simulated_anneal(const QuboInstance& instance, const SaParams& params) {
  params.validate();
  const int d = instance.d;
  if (d < 1) throw std::invalid_argument("SA needs d >= 1");
  const auto [beta_lo, beta_hi] = params.beta_range.value_or(default_beta_range(instance));
  const int levels = std::max(1, params.num_sweeps / params.sweeps_per_beta);
  const double w_quad = 1.0 - instance.beta;

  SelectionResult best;
  best.image_id = instance.image_id;
  best.class_label = instance.class_label;
  best.method = SolveMethod::Sa;
  best.n_shots = params.num_reads;
  bool have_best = false;

  std::vector<int> order(d);
  std::vector<double> local(d);
  Bitstring z(d);
  for (int read = 0; read < params.num_reads; ++read) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(read)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int p = 0; p < d; ++p) z[p] = unit(rng) < 0.5;
    for (int p = 0; p < d; ++p) {
      local[p] = 0.0;
      for (int q = 0; q < d; ++q) {
        if (q != p && z[q]) local[p] += instance.J(p, q);
      }
    }
    std::iota(order.begin(), order.end(), 0);

    for (int sweep = 0; sweep < params.num_sweeps; ++sweep) {
      const int level = std::min(levels - 1, sweep / params.sweeps_per_beta);
      const double inv_t = levels == 1 ? beta_hi : beta_lo + (beta_hi - beta_lo) * level / (levels - 1);
      std::shuffle(order.begin(), order.end(), rng);
      for (int p : order) {
        // Energy change of flipping z_p.
        const double field = w_quad * local[p] - instance.beta * instance.h[p];
        const double delta = z[p] ? -field : field;
        if (delta <= 0.0 || unit(rng) < std::exp(-inv_t * delta)) {
          const double sign = z[p] ? -1.0 : 1.0;
          z[p] ^= 1;
          for (int q = 0; q < d; ++q) {
            if (q != p) local[q] += sign * instance.J(q, p);
          }
        }
      }
    }

    ++best.histogram[z];
    const double e = energy(instance, z);
    if (!have_best || e < best.energy - 1e-12 || (std::abs(e - best.energy) <= 1e-12 && z < best.bitstring)) {
      best.energy = e;
      best.bitstring = z;
      have_best = true;
    }
  }
  best.selected_fm_indices = selected_indices(instance, best.bitstring);
  return best;
}

}  // namespace qfs
