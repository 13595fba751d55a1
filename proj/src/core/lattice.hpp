#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lattdse {

using i64 = std::int64_t;

/// A point of the lattice with exact rational coordinates num[j]/denom.
struct LatticePoint {
  std::vector<i64> num;   // numerators in [0, denom)
  i64 denom = 1;          // lcm of the moduli
  std::vector<i64> index; // multi-index k, k_i in [0, n_i)
  i64 flat_index = 0;     // kappa = sum_i k_i * prod_{j>i} n_j

  std::vector<double> coords() const;
};

/// Canonical rank-r integration lattice on [0,1)^d.
///
/// Construction validates the canonical form: n_{i+1} | n_i, nonzero generator
/// components coprime to their modulus, generators rationally independent, and
/// exactly prod(n_i) distinct points. Immutable afterwards.
class Lattice {
public:
  /// gen holds r columns, each of length d.
  static Lattice create(int dim, int rank, std::vector<std::vector<i64>> gen,
                        std::vector<i64> moduli);

  static Lattice rank1(std::vector<i64> z, i64 n);
  /// Regular (possibly anisotropic) grid as a rank-d identity lattice.
  /// Moduli must be given in nonincreasing divisibility order.
  static Lattice grid(std::vector<i64> moduli);

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return rank_; }
  i64 n_total() const noexcept { return n_total_; }
  i64 denom() const noexcept { return denom_; }
  const std::vector<i64>& moduli() const noexcept { return moduli_; }
  /// Column i of the generator matrix.
  std::span<const i64> gen_column(int i) const { return {gen_[i].data(), gen_[i].size()}; }

  /// h in the dual lattice: z_i . h == 0 (mod n_i) for every i.
  bool in_dual(std::span<const i64> h) const;

  /// Residue multi-index xi_i = (z_i . h) mod n_i, nonnegative.
  std::vector<i64> residue(std::span<const i64> h) const;
  /// Residue flattened lexicographically (last modulus fastest).
  i64 flat_residue(std::span<const i64> h) const;

  LatticePoint point(i64 flat_index) const;
  std::vector<LatticePoint> enumerate_points() const;

  /// All point numerators as one row-major n_total x d array (denominator denom()).
  std::vector<i64> point_numerators() const;
  /// All points converted to double, row-major n_total x d.
  std::vector<double> point_coords() const;

  /// FNV-1a hash of (d, r, Z, n); identifies the lattice in file headers.
  std::uint64_t hash() const noexcept { return hash_; }

  std::string to_json() const;
  static Lattice from_json(const std::string& text);

  friend bool operator==(const Lattice& a, const Lattice& b) = default;

private:
  Lattice() = default;

  int dim_ = 0;
  int rank_ = 0;
  std::vector<std::vector<i64>> gen_; // columns
  std::vector<i64> moduli_;
  i64 n_total_ = 0;
  i64 denom_ = 0;
  std::vector<i64> col_scale_;   // denom / n_i
  std::vector<i64> flat_weights_; // prod_{j>i} n_j
  std::uint64_t hash_ = 0;
};

} // namespace lattdse
