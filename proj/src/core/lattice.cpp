#include "lattice.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include <json.hpp>

namespace lattdse {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr i64 kMaxDenom = i64(1) << 40;
constexpr i64 kMaxProduct = i64(1) << 62;

i64 mod_nonneg(i128 v, i64 m) {
  i64 r = static_cast<i64>(v % m);
  return r < 0 ? r + m : r;
}

i64 gcd64(i64 a, i64 b) { return std::gcd(a < 0 ? -a : a, b); }

// Rank of an integer matrix by fraction-free (Bareiss) elimination in 128-bit
// arithmetic. Returns nullopt if intermediate values risk overflowing.
std::optional<int> rank_bareiss(std::vector<std::vector<i128>> m) {
  const i128 limit = i128(1) << 100;
  size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  i128 prev = 1;
  size_t rank = 0;
  for (size_t col = 0; col < cols && rank < rows; ++col) {
    size_t piv = rank;
    while (piv < rows && m[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[rank], m[piv]);
    for (size_t i = rank + 1; i < rows; ++i) {
      for (size_t j = col + 1; j < cols; ++j) {
        i128 a = m[rank][col], b = m[i][j], c = m[i][col], d = m[rank][j];
        if ((a > limit || a < -limit) || (b > limit || b < -limit) ||
            (c > limit || c < -limit) || (d > limit || d < -limit))
          return std::nullopt;
        m[i][j] = (a * b - c * d) / prev;
      }
      m[i][col] = 0;
    }
    prev = m[rank][col];
    ++rank;
  }
  return static_cast<int>(rank);
}

int rank_mod_p(std::vector<std::vector<i64>> z, u128 p) {
  size_t rows = z.size(), cols = rows ? z[0].size() : 0;
  std::vector<std::vector<u128>> m(rows, std::vector<u128>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) {
      i64 v = z[i][j] % static_cast<i64>(p);
      m[i][j] = v < 0 ? static_cast<u128>(v + static_cast<i64>(p)) : static_cast<u128>(v);
    }
  auto pow_mod = [&](u128 b, u128 e) {
    u128 r = 1;
    while (e) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return r;
  };
  size_t rank = 0;
  for (size_t col = 0; col < cols && rank < rows; ++col) {
    size_t piv = rank;
    while (piv < rows && m[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[rank], m[piv]);
    u128 inv = pow_mod(m[rank][col], p - 2);
    for (size_t i = rank + 1; i < rows; ++i) {
      if (m[i][col] == 0) continue;
      u128 f = m[i][col] * inv % p;
      for (size_t j = col; j < cols; ++j)
        m[i][j] = (m[i][j] + (p - f) * m[rank][j]) % p;
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

// True iff the generator columns are linearly independent over Q. Exact: a
// full-rank elimination modulo a prime already certifies independence; the
// Bareiss path settles the deficient direction for all inputs that fit in
// 128 bits, and three independent primes settle the rest.
bool columns_independent(const std::vector<std::vector<i64>>& gen, int dim, int rank) {
  std::vector<std::vector<i128>> zt(rank, std::vector<i128>(dim));
  std::vector<std::vector<i64>> zt64(rank, std::vector<i64>(dim));
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < dim; ++j) {
      zt[i][j] = gen[i][j];
      zt64[i][j] = gen[i][j];
    }
  if (auto r = rank_bareiss(zt)) return *r == rank;
  for (u128 p : {u128(2305843009213693951ULL), u128(2147483647ULL), u128(1000000000000000009ULL)})
    if (rank_mod_p(zt64, p) == rank) return true;
  return false;
}

// Number of distinct lattice points: the order of the subgroup of (Z_L)^d
// generated by the scaled columns (L/n_i) z_i, via a diagonalization with
// unimodular row/column operations. Entries may be reduced mod L throughout
// since the generated subgroup only depends on the residues.
i64 distinct_point_count(const std::vector<std::vector<i64>>& gen,
                         const std::vector<i64>& col_scale, i64 L, int dim, int rank) {
  std::vector<std::vector<i64>> a(dim, std::vector<i64>(rank));
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < rank; ++i)
      a[j][i] = mod_nonneg(i128(col_scale[i]) * gen[i][j], L);

  auto row_op = [&](int dst, int src, i64 q) { // row_dst -= q * row_src
    for (int i = 0; i < rank; ++i) a[dst][i] = mod_nonneg(i128(a[dst][i]) - i128(q) * a[src][i], L);
  };
  auto col_op = [&](int dst, int src, i64 q) {
    for (int j = 0; j < dim; ++j) a[j][dst] = mod_nonneg(i128(a[j][dst]) - i128(q) * a[j][src], L);
  };

  i64 count = 1;
  int t = 0;
  for (; t < rank && t < dim; ++t) {
    for (;;) {
      int pr = -1, pc = -1;
      i64 best = 0;
      for (int j = t; j < dim; ++j)
        for (int i = t; i < rank; ++i)
          if (a[j][i] != 0 && (pr < 0 || a[j][i] < best)) { best = a[j][i]; pr = j; pc = i; }
      if (pr < 0) break; // trailing block is zero
      std::swap(a[t], a[pr]);
      for (int j = 0; j < dim; ++j) std::swap(a[j][t], a[j][pc]);
      bool clean = true;
      for (int j = t + 1; j < dim; ++j)
        if (a[j][t] != 0) { row_op(j, t, a[j][t] / a[t][t]); clean &= (a[j][t] == 0); }
      for (int i = t + 1; i < rank; ++i)
        if (a[t][i] != 0) { col_op(i, t, a[t][i] / a[t][t]); clean &= (a[t][i] == 0); }
      if (clean) break;
    }
    if (a[t][t] == 0) break;
    count *= L / gcd64(a[t][t], L);
  }
  return count;
}

std::uint64_t fnv1a(std::uint64_t h, i64 v) {
  auto x = static_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) {
    h ^= (x >> (8 * b)) & 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace

std::vector<double> LatticePoint::coords() const {
  std::vector<double> x(num.size());
  for (size_t j = 0; j < num.size(); ++j) x[j] = static_cast<double>(num[j]) / static_cast<double>(denom);
  return x;
}

Lattice Lattice::create(int dim, int rank, std::vector<std::vector<i64>> gen,
                        std::vector<i64> moduli) {
  if (dim < 1 || rank < 1 || rank > dim)
    raise(Errc::invalid_argument, "lattice requires 1 <= rank <= dim");
  if (gen.size() != static_cast<size_t>(rank) || moduli.size() != static_cast<size_t>(rank))
    raise(Errc::invalid_argument, "generator must have rank columns and rank moduli");
  for (auto& col : gen)
    if (col.size() != static_cast<size_t>(dim))
      raise(Errc::invalid_argument, "generator column length must equal dim");
  for (i64 n : moduli)
    if (n < 1) raise(Errc::invalid_argument, "moduli must be >= 1");

  for (int i = 0; i + 1 < rank; ++i)
    if (moduli[i] % moduli[i + 1] != 0)
      raise(Errc::non_divisible_moduli,
            "modulus " + std::to_string(moduli[i + 1]) + " does not divide " + std::to_string(moduli[i]));

  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < dim; ++j) {
      i64 c = mod_nonneg(gen[i][j], moduli[i]);
      if (c != 0 && std::gcd(c, moduli[i]) != 1)
        raise(Errc::non_coprime_component, "component " + std::to_string(gen[i][j]) + " of column " +
                                               std::to_string(i) + " (coordinate " + std::to_string(j) +
                                               ") shares a factor with modulus " + std::to_string(moduli[i]));
    }

  if (!columns_independent(gen, dim, rank))
    raise(Errc::rank_deficient, "generator columns are linearly dependent over the rationals");

  Lattice lat;
  lat.dim_ = dim;
  lat.rank_ = rank;
  lat.gen_ = std::move(gen);
  lat.moduli_ = std::move(moduli);

  i64 L = 1, n_total = 1;
  i64 max_abs = 1;
  for (int i = 0; i < rank; ++i) {
    i64 n = lat.moduli_[i];
    i64 g = std::gcd(L, n);
    if (L / g > kMaxDenom / n) raise(Errc::overflow_risk, "lcm of moduli exceeds supported range");
    L = L / g * n;
    if (n_total > kMaxProduct / n) raise(Errc::overflow_risk, "point count exceeds supported range");
    n_total *= n;
    for (i64 v : lat.gen_[i]) max_abs = std::max(max_abs, v < 0 ? -v : v);
  }
  if (max_abs > kMaxProduct / L)
    raise(Errc::overflow_risk, "lcm(moduli) * max|z| exceeds the exact integer range");

  lat.denom_ = L;
  lat.n_total_ = n_total;
  lat.col_scale_.resize(rank);
  for (int i = 0; i < rank; ++i) lat.col_scale_[i] = L / lat.moduli_[i];
  lat.flat_weights_.assign(rank, 1);
  for (int i = rank - 2; i >= 0; --i) lat.flat_weights_[i] = lat.flat_weights_[i + 1] * lat.moduli_[i + 1];

  if (i64 c = distinct_point_count(lat.gen_, lat.col_scale_, L, dim, rank); c != n_total)
    raise(Errc::point_count_mismatch, "generators produce " + std::to_string(c) +
                                          " distinct points, expected " + std::to_string(n_total));

  std::uint64_t h = 14695981039346656037ULL;
  h = fnv1a(h, dim);
  h = fnv1a(h, rank);
  for (i64 n : lat.moduli_) h = fnv1a(h, n);
  for (auto& col : lat.gen_)
    for (i64 v : col) h = fnv1a(h, v);
  lat.hash_ = h;
  return lat;
}

Lattice Lattice::rank1(std::vector<i64> z, i64 n) {
  return create(static_cast<int>(z.size()), 1, {std::move(z)}, {n});
}

Lattice Lattice::grid(std::vector<i64> moduli) {
  int d = static_cast<int>(moduli.size());
  std::vector<std::vector<i64>> gen(d, std::vector<i64>(d, 0));
  for (int i = 0; i < d; ++i) gen[i][i] = 1;
  return create(d, d, std::move(gen), std::move(moduli));
}

bool Lattice::in_dual(std::span<const i64> h) const {
  if (h.size() != static_cast<size_t>(dim_)) raise(Errc::invalid_argument, "dual test: dimension mismatch");
  for (int i = 0; i < rank_; ++i) {
    i128 dot = 0;
    for (int j = 0; j < dim_; ++j) dot += i128(gen_[i][j]) * h[j];
    if (dot % moduli_[i] != 0) return false;
  }
  return true;
}

std::vector<i64> Lattice::residue(std::span<const i64> h) const {
  if (h.size() != static_cast<size_t>(dim_)) raise(Errc::invalid_argument, "residue: dimension mismatch");
  std::vector<i64> xi(rank_);
  for (int i = 0; i < rank_; ++i) {
    i128 dot = 0;
    for (int j = 0; j < dim_; ++j) dot += i128(gen_[i][j]) * h[j];
    xi[i] = mod_nonneg(dot, moduli_[i]);
  }
  return xi;
}

i64 Lattice::flat_residue(std::span<const i64> h) const {
  i64 flat = 0;
  for (int i = 0; i < rank_; ++i) {
    i128 dot = 0;
    for (int j = 0; j < dim_; ++j) dot += i128(gen_[i][j]) * h[j];
    flat += mod_nonneg(dot, moduli_[i]) * flat_weights_[i];
  }
  return flat;
}

LatticePoint Lattice::point(i64 flat_index) const {
  if (flat_index < 0 || flat_index >= n_total_) raise(Errc::invalid_argument, "point index out of range");
  LatticePoint p;
  p.denom = denom_;
  p.flat_index = flat_index;
  p.index.resize(rank_);
  i64 rem = flat_index;
  for (int i = 0; i < rank_; ++i) {
    p.index[i] = rem / flat_weights_[i];
    rem %= flat_weights_[i];
  }
  p.num.assign(dim_, 0);
  for (int j = 0; j < dim_; ++j) {
    i128 acc = 0;
    for (int i = 0; i < rank_; ++i) acc += i128(col_scale_[i]) * gen_[i][j] % denom_ * p.index[i];
    p.num[j] = mod_nonneg(acc, denom_);
  }
  return p;
}

std::vector<LatticePoint> Lattice::enumerate_points() const {
  std::vector<LatticePoint> pts;
  pts.reserve(static_cast<size_t>(n_total_));
  for (i64 k = 0; k < n_total_; ++k) pts.push_back(point(k));
  return pts;
}

std::vector<i64> Lattice::point_numerators() const {
  std::vector<i64> out(static_cast<size_t>(n_total_) * dim_);
  // step_[i][j] = numerator increment when k_i advances by one
  std::vector<std::vector<i64>> step(rank_, std::vector<i64>(dim_));
  for (int i = 0; i < rank_; ++i)
    for (int j = 0; j < dim_; ++j) step[i][j] = mod_nonneg(i128(col_scale_[i]) * gen_[i][j], denom_);

  std::vector<i64> k(rank_, 0), cur(dim_, 0);
  for (i64 kappa = 0; kappa < n_total_; ++kappa) {
    std::copy(cur.begin(), cur.end(), out.begin() + kappa * dim_);
    for (int i = rank_ - 1; i >= 0; --i) {
      ++k[i];
      for (int j = 0; j < dim_; ++j) {
        cur[j] += step[i][j];
        if (cur[j] >= denom_) cur[j] -= denom_;
      }
      if (k[i] < moduli_[i]) break;
      // roll over: subtract n_i full increments of column i
      k[i] = 0;
      for (int j = 0; j < dim_; ++j)
        cur[j] = mod_nonneg(i128(cur[j]) - i128(step[i][j]) * moduli_[i], denom_);
    }
  }
  return out;
}

std::vector<double> Lattice::point_coords() const {
  auto num = point_numerators();
  std::vector<double> out(num.size());
  const double inv = 1.0 / static_cast<double>(denom_);
  for (size_t i = 0; i < num.size(); ++i) out[i] = static_cast<double>(num[i]) * inv;
  return out;
}

std::string Lattice::to_json() const {
  nlohmann::json j;
  j["d"] = dim_;
  j["r"] = rank_;
  j["Z"] = gen_;
  j["n"] = moduli_;
  return j.dump();
}

Lattice Lattice::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, std::string("lattice JSON parse failure: ") + e.what());
  }
  if (!j.contains("d") || !j.contains("r") || !j.contains("Z") || !j.contains("n"))
    raise(Errc::io_error, "lattice JSON requires fields d, r, Z, n");
  try {
    return create(j.at("d").get<int>(), j.at("r").get<int>(),
                  j.at("Z").get<std::vector<std::vector<i64>>>(), j.at("n").get<std::vector<i64>>());
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, std::string("lattice JSON field types: ") + e.what());
  }
}

} // namespace lattdse
