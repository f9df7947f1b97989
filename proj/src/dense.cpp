#include "gibbslearn/dense.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "gibbslearn/errors.hpp"

namespace gibbslearn {

namespace {

std::atomic<std::size_t> g_dense_cap{std::size_t{1} << 12};

// full_index[a][e] for a register split into kept positions and the rest.
std::vector<std::vector<std::size_t>> split_indices(const SiteSet& reg, const SiteSet& keep) {
  const int k = static_cast<int>(reg.size());
  std::vector<int> kept_pos, env_pos;
  for (int p = 0; p < k; ++p) {
    if (std::binary_search(keep.begin(), keep.end(), reg[p]))
      kept_pos.push_back(p);
    else
      env_pos.push_back(p);
  }
  if (kept_pos.size() != keep.size())
    throw MalformedInput("partial trace: kept sites are not a subset of the register");
  const std::size_t na = std::size_t{1} << kept_pos.size();
  const std::size_t ne = std::size_t{1} << env_pos.size();
  std::vector<std::vector<std::size_t>> table(na, std::vector<std::size_t>(ne, 0));
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t e = 0; e < ne; ++e) {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < kept_pos.size(); ++j) {
        const std::size_t bit = (a >> (kept_pos.size() - 1 - j)) & 1U;
        idx |= bit << (k - 1 - kept_pos[j]);
      }
      for (std::size_t j = 0; j < env_pos.size(); ++j) {
        const std::size_t bit = (e >> (env_pos.size() - 1 - j)) & 1U;
        idx |= bit << (k - 1 - env_pos[j]);
      }
      table[a][e] = idx;
    }
  }
  return table;
}

}  // namespace

SiteSet make_site_set(std::vector<int> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

SiteSet site_union(const SiteSet& a, const SiteSet& b) {
  SiteSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool sites_intersect(const SiteSet& a, const SiteSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

std::size_t dense_dimension_cap() { return g_dense_cap.load(); }

void set_dense_dimension_cap(std::size_t cap) {
  if (cap < 2) throw RangeError("dense dimension cap must be at least 2");
  g_dense_cap.store(cap);
}

std::size_t checked_dimension(int num_qubits) {
  if (num_qubits < 0) throw MalformedInput("negative qubit count");
  if (num_qubits >= 62 || (std::size_t{1} << num_qubits) > dense_dimension_cap())
    throw ResourceError("dense dimension 2^" + std::to_string(num_qubits) +
                        " exceeds the configured cap " + std::to_string(dense_dimension_cap()));
  return std::size_t{1} << num_qubits;
}

double op_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double hermiticity_defect(const Matrix& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix dagger(const Matrix& a) { return a.adjoint(); }

Matrix partial_trace(const Matrix& rho, const SiteSet& reg, const SiteSet& keep) {
  if (keep == reg) return rho;
  const auto table = split_indices(reg, keep);
  const std::size_t na = table.size();
  const std::size_t ne = table.front().size();
  Matrix out = Matrix::Zero(na, na);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < na; ++b) {
      cplx acc = 0.0;
      for (std::size_t e = 0; e < ne; ++e) acc += rho(table[a][e], table[b][e]);
      out(a, b) = acc;
    }
  return out;
}

Matrix embed(const Matrix& a, const SiteSet& sub, const SiteSet& reg) {
  if (sub == reg) return a;
  const auto table = split_indices(reg, sub);
  const std::size_t na = table.size();
  const std::size_t ne = table.front().size();
  if (static_cast<std::size_t>(a.rows()) != na) throw MalformedInput("embed: dimension mismatch");
  Matrix out = Matrix::Zero(na * ne, na * ne);
  for (std::size_t x = 0; x < na; ++x)
    for (std::size_t y = 0; y < na; ++y) {
      const cplx v = a(x, y);
      if (v == cplx(0.0)) continue;
      for (std::size_t e = 0; e < ne; ++e) out(table[x][e], table[y][e]) = v;
    }
  return out;
}

}  // namespace gibbslearn
