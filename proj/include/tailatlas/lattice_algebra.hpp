#pragma once

#include <optional>
#include <vector>

#include "tailatlas/rational.hpp"

namespace tailatlas {

// Exact integer lattice computations in dimension <= 4 (time + up to three
// fiber coordinates). Everything runs on cpp_int so intermediate Euclidean
// reductions cannot overflow.

using LVec = std::vector<Int>;

inline LVec lvec_sub(const LVec& a, const LVec& b) {
  LVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline bool lvec_zero(const LVec& v) {
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}

/// Row-echelon integer lattice basis (Hermite-style, lower staircase).
/// rows[k] has its first nonzero (positive) entry at pivot_col[k], and the
/// pivot columns strictly increase with k.
struct IntLattice {
  int dim = 0;
  std::vector<LVec> rows;
  std::vector<int> pivot_col;

  int rank() const { return static_cast<int>(rows.size()); }
};

/// Builds the echelon basis of the lattice generated by gens by repeated
/// Euclidean reduction column by column.
inline IntLattice lattice_from_generators(int dim, std::vector<LVec> gens) {
  IntLattice lat;
  lat.dim = dim;
  for (int col = 0; col < dim; ++col) {
    // Reduce all generators so at most one has a nonzero entry in col.
    while (true) {
      int a = -1, b = -1;
      for (std::size_t i = 0; i < gens.size(); ++i) {
        if (gens[i][col] == 0) continue;
        if (a == -1)
          a = static_cast<int>(i);
        else {
          b = static_cast<int>(i);
          break;
        }
      }
      if (b == -1) {
        if (a != -1) {
          if (gens[a][col] < 0)
            for (auto& x : gens[a]) x = -x;
          lat.rows.push_back(gens[a]);
          lat.pivot_col.push_back(col);
          gens.erase(gens.begin() + a);
        }
        break;
      }
      if (abs(gens[a][col]) > abs(gens[b][col])) std::swap(a, b);
      Int q = gens[b][col] / gens[a][col];
      for (int j = 0; j < dim; ++j) gens[b][j] -= q * gens[a][j];
    }
    // Entries left of col are already zero in all remaining generators.
  }
  return lat;
}

/// Membership by back-substitution along the staircase.
inline bool lattice_contains(const IntLattice& lat, LVec v) {
  for (int k = 0; k < lat.rank(); ++k) {
    int c = lat.pivot_col[k];
    if (v[c] == 0) continue;
    if (v[c] % lat.rows[k][c] != 0) return false;
    Int q = v[c] / lat.rows[k][c];
    for (int j = 0; j < lat.dim; ++j) v[j] -= q * lat.rows[k][j];
  }
  return lvec_zero(v);
}

/// Canonical residue of v modulo the lattice: reduce each pivot coordinate
/// into [0, pivot). Two vectors get equal residues iff they differ by a
/// lattice element, which makes the residue usable as a coset key.
inline LVec lattice_residue(const IntLattice& lat, LVec v) {
  for (int k = 0; k < lat.rank(); ++k) {
    int c = lat.pivot_col[k];
    Int p = lat.rows[k][c];
    Int q;
    if (v[c] >= 0)
      q = v[c] / p;
    else
      q = -((-v[c] + p - 1) / p);
    for (int j = 0; j < lat.dim; ++j) v[j] -= q * lat.rows[k][j];
  }
  return v;
}

/// Solves sum_i x_i rows[i] = v exactly over the rationals. Returns nothing
/// when v is outside the rational row span. Used for order-of-coset and
/// chain-position computations where coefficients, not membership, matter.
inline std::optional<std::vector<Rat>> solve_rational(const std::vector<LVec>& rows,
                                                      const LVec& v, int dim) {
  const int n = static_cast<int>(rows.size());
  // Gaussian elimination on the transposed system (dim equations, n unknowns).
  std::vector<std::vector<Rat>> a(dim, std::vector<Rat>(n + 1, Rat(0)));
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < n; ++i) a[j][i] = Rat(rows[i][j]);
    a[j][n] = Rat(v[j]);
  }
  std::vector<int> pivot_of_row(dim, -1);
  int r = 0;
  for (int c = 0; c < n && r < dim; ++c) {
    int p = -1;
    for (int j = r; j < dim; ++j)
      if (a[j][c] != 0) { p = j; break; }
    if (p == -1) continue;
    std::swap(a[r], a[p]);
    Rat inv = Rat(1) / a[r][c];
    for (int k = c; k <= n; ++k) a[r][k] *= inv;
    for (int j = 0; j < dim; ++j) {
      if (j == r || a[j][c] == 0) continue;
      Rat f = a[j][c];
      for (int k = c; k <= n; ++k) a[j][k] -= f * a[r][k];
    }
    pivot_of_row[r] = c;
    ++r;
  }
  for (int j = r; j < dim; ++j)
    if (a[j][n] != 0) return std::nullopt;
  std::vector<Rat> x(n, Rat(0));
  for (int j = 0; j < r; ++j) x[pivot_of_row[j]] = a[j][n];
  return x;
}

/// Smallest k >= 1 with k*v in the lattice, or nullopt when no such k exists
/// (v has infinite order in the quotient group).
inline std::optional<Int> coset_order(const IntLattice& lat, const LVec& v) {
  if (lattice_contains(lat, v)) return Int(1);
  if (lat.rank() == 0) return std::nullopt;
  auto x = solve_rational(lat.rows, v, lat.dim);
  if (!x) return std::nullopt;
  Int k = 1;
  for (const auto& xi : *x) {
    Int den = boost::multiprecision::denominator(xi);
    k = boost::multiprecision::lcm(k, den);
  }
  return k;
}

}  // namespace tailatlas
