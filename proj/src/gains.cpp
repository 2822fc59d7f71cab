#include "attfuse/gains.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace attfuse {

VecX char_poly_coeffs(const GainVector& gamma) {
  if (gamma.size() < 1) throw std::invalid_argument("char_poly_coeffs: empty gain vector");
  VecX c(gamma.size() + 1);
  c(0) = 1.0;
  c.tail(gamma.size()) = gamma;
  return c;
}

MatX companion_matrix(const GainVector& gamma) {
  const Eigen::Index n = gamma.size();
  if (n < 1) throw std::invalid_argument("companion_matrix: empty gain vector");
  MatX a = MatX::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) a(n - 1, j) = -gamma(n - 1 - j);
  return a;
}

GainVector project_gamma(const GainVector& gamma) {
  if (gamma.size() < 2)
    throw std::invalid_argument("project_gamma: projection undefined for n = 1");
  return gamma.head(gamma.size() - 1);
}

StabilityStatus is_hurwitz(const GainVector& gamma) {
  const VecX c = char_poly_coeffs(gamma);  // rejects empty
  const int n = static_cast<int>(gamma.size());
  constexpr double kPivotTol = 1e-12;

  // Routh table rows; row 0 holds c0, c2, c4, ..., row 1 holds c1, c3, ...
  const int width = n / 2 + 1;
  std::vector<std::vector<double>> rows(2, std::vector<double>(width, 0.0));
  for (int j = 0; 2 * j <= n; ++j) rows[0][j] = c(2 * j);
  for (int j = 0; 2 * j + 1 <= n; ++j) rows[1][j] = c(2 * j + 1);

  // A strictly Hurwitz polynomial has a strictly positive first column, so a
  // zero pivot (or an all-zero row, which signals roots symmetric about the
  // origin) already disproves it. Near-zero pivots lose the sign to round-off.
  for (int r = 1; r <= n; ++r) {
    const std::vector<double>& prev = rows[(r - 1) % 2];
    std::vector<double>& cur = rows[r % 2];
    const double pivot = cur[0];
    if (pivot == 0.0) return StabilityStatus::kNotHurwitz;
    if (std::abs(pivot) < kPivotTol) return StabilityStatus::kIndeterminate;
    if (pivot < 0.0) return StabilityStatus::kNotHurwitz;
    if (r == n) break;
    std::vector<double> next(width, 0.0);
    for (int j = 0; j + 1 < width; ++j) {
      next[j] = prev[j + 1] - (prev[0] / pivot) * cur[j + 1];
    }
    rows[(r - 1) % 2] = next;  // becomes row r+1
  }
  return StabilityStatus::kHurwitz;
}

StabilityStatus in_hbar(const GainVector& gamma) {
  const StabilityStatus full = is_hurwitz(gamma);
  if (gamma.size() == 1) return full;  // no projection at n = 1
  if (full != StabilityStatus::kHurwitz) return full;
  return is_hurwitz(project_gamma(gamma));
}

GainVector binomial_gains(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("binomial_gains: order must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("binomial_gains: alpha must be > 0");
  GainVector g(n);
  double binom = 1.0;  // C(n, l) built incrementally
  double apow = 1.0;
  for (int l = 1; l <= n; ++l) {
    binom = binom * static_cast<double>(n - l + 1) / static_cast<double>(l);
    apow *= alpha;
    g(l - 1) = binom * apow;
  }
  return g;
}

MatX kron_with_identity(const MatX& e, int k) {
  if (k < 1) throw std::invalid_argument("kron_with_identity: k must be >= 1");
  const Eigen::Index n = e.rows();
  if (e.cols() != n) throw std::invalid_argument("kron_with_identity: E must be square");
  MatX out = MatX::Zero(n * k, n * k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (int a = 0; a < k; ++a) out(i * k + a, j * k + a) = e(i, j);
  return out;
}

void save_gain_file(const std::string& path, const GainFile& gf) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_gain_file: cannot open " + path);
  f << "order = " << gf.order << "\n";
  if (gf.alpha > 0.0) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", gf.alpha);
    f << "alpha = " << buf << "\n";
  }
  for (size_t i = 0; i < gf.gammas.size(); ++i) {
    f << "gamma" << (i + 1) << " =";
    for (Eigen::Index j = 0; j < gf.gammas[i].size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", gf.gammas[i](j));
      f << " " << buf;
    }
    f << "\n";
  }
}

GainFile load_gain_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_gain_file: cannot open " + path);
  GainFile gf;
  gf.order = 0;
  std::string line;
  std::vector<std::pair<int, GainVector>> gammas;
  while (std::getline(f, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "order") {
      gf.order = std::stoi(val);
    } else if (key == "alpha") {
      gf.alpha = std::stod(val);
    } else if (key.rfind("gamma", 0) == 0) {
      const int idx = std::stoi(key.substr(5));
      std::istringstream ss(val);
      std::vector<double> vals;
      double x;
      while (ss >> x) vals.push_back(x);
      GainVector g(vals.size());
      for (size_t j = 0; j < vals.size(); ++j) g(static_cast<Eigen::Index>(j)) = vals[j];
      gammas.emplace_back(idx, g);
    }
  }
  if (gf.order < 1) throw std::runtime_error("load_gain_file: missing or bad order");
  std::sort(gammas.begin(), gammas.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [idx, g] : gammas) {
    if (g.size() != gf.order)
      throw std::runtime_error("load_gain_file: gamma length disagrees with order");
    gf.gammas.push_back(std::move(g));
  }
  if (gf.gammas.empty()) throw std::runtime_error("load_gain_file: no gamma vectors");
  return gf;
}

}  // namespace attfuse
