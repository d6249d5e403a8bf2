#include "neurodecode/csp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "neurodecode/kernels.hpp"
#include "json.hpp"

namespace neurodecode::csp {

namespace {

double off_diagonal_frobenius(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius(const Matrix& a) {
  return std::sqrt(kernels::sumsq(a.data(), a.rows() * a.cols()));
}

double quadratic_form(std::span<const double> w, const Matrix& c) {
  double q = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i)
    q += w[i] * kernels::dot(c.row(i), w.data(), c.cols());
  return q;
}

}  // namespace

std::vector<std::size_t> top_k_by_magnitude(std::span<const double> w,
                                            std::size_t k) {
  if (k > w.size()) throw std::invalid_argument("k exceeds coefficient count");
  std::vector<std::size_t> idx(w.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(w[a]), mb = std::abs(w[b]);
    if (ma != mb) return ma > mb;
    return a < b;  // deterministic tie rule: lower index wins
  });
  idx.resize(k);
  return idx;
}

SpatialCovariance covariance(const std::vector<const Trial*>& trials,
                             int class_id) {
  if (trials.empty()) throw std::invalid_argument("covariance of empty class");
  const std::size_t n = trials.front()->epoch.channels();

  Matrix c(n, n);
  std::size_t total_samples = 0;
  Matrix centered;
  for (const Trial* t : trials) {
    if (t->epoch.channels() != n)
      throw std::invalid_argument("covariance: inconsistent channel counts");
    const std::size_t len = t->epoch.length();
    if (len == 0) throw std::invalid_argument("covariance: empty epoch");
    centered = t->epoch.samples;
    for (std::size_t ch = 0; ch < n; ++ch) {
      double* row = centered.row(ch);
      const double mean = kernels::sum(row, len) / static_cast<double>(len);
      for (std::size_t s = 0; s < len; ++s) row[s] -= mean;
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b)
        c(a, b) += kernels::dot(centered.row(a), centered.row(b), len);
    total_samples += len;
  }
  const double inv = 1.0 / static_cast<double>(total_samples);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const double v = c(a, b) * inv;
      c(a, b) = v;
      c(b, a) = v;  // symmetrization is exact: one value per pair
    }
  return SpatialCovariance{std::move(c), class_id, trials.size()};
}

EighResult jacobi_eigh(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("jacobi: matrix not square");
  const std::size_t n = a.rows();
  const double scale = std::max(1.0, a.max_abs());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * scale)
        throw std::invalid_argument("jacobi: matrix not symmetric");

  Matrix m = a;
  // Fold any sub-tolerance asymmetry away so rotations see one value per pair.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (m(i, j) + m(j, i)) / 2.0;
      m(i, j) = v;
      m(j, i) = v;
    }

  Matrix v = Matrix::identity(n);
  const double tol = 1e-12 * std::max(frobenius(m), 1e-300);
  bool converged = off_diagonal_frobenius(m) <= tol;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double mpi = m(p, i), mqi = m(q, i);
          m(p, i) = c * mpi - s * mqi;
          m(q, i) = s * mpi + c * mqi;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    converged = off_diagonal_frobenius(m) <= tol;
  }
  if (!converged &&
      off_diagonal_frobenius(m) > 1e-9 * std::max(frobenius(a), 1e-300))
    throw std::runtime_error("jacobi: no convergence after 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return m(x, x) > m(y, y); });

  EighResult r;
  r.values.resize(n);
  r.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    r.values[j] = m(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) r.vectors(i, j) = v(i, order[j]);
  }
  return r;
}

double objective(std::span<const double> w, const SpatialCovariance& cov1,
                 const SpatialCovariance& cov2) {
  if (w.size() != cov1.dim() || cov1.dim() != cov2.dim())
    throw std::invalid_argument("objective: dimension mismatch");
  const double den = quadratic_form(w, cov2.c);
  if (den <= 0.0) throw std::domain_error("objective: zero denominator");
  return quadratic_form(w, cov1.c) / den;
}

CspModel fit_csp(const SpatialCovariance& cov1, const SpatialCovariance& cov2,
                 std::size_t k, double ridge) {
  const std::size_t n = cov1.dim();
  if (cov2.dim() != n) throw std::invalid_argument("fit_csp: dimension mismatch");
  if (k == 0 || k > n) throw std::invalid_argument("fit_csp: k out of range");

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += cov1.c(i, i) + cov2.c(i, i);
  // The identity shim goes half into each class so the whitened class
  // spectra remain exactly complementary (S1 + S2 = I).
  const double shim = ridge * trace / static_cast<double>(n) / 2.0;
  Matrix c1 = cov1.c, c2 = cov2.c;
  for (std::size_t i = 0; i < n; ++i) {
    c1(i, i) += shim;
    c2(i, i) += shim;
  }
  Matrix cc(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cc(i, j) = c1(i, j) + c2(i, j);

  const EighResult ec = jacobi_eigh(cc);
  for (double lambda : ec.values)
    if (!(lambda > 0.0))
      throw std::runtime_error("fit_csp: composite covariance is singular");

  Matrix p(n, n);  // whitening: rows are inverse-sqrt-scaled eigenvectors of cc
  for (std::size_t i = 0; i < n; ++i) {
    const double inv_sqrt = 1.0 / std::sqrt(ec.values[i]);
    for (std::size_t j = 0; j < n; ++j) p(i, j) = ec.vectors(j, i) * inv_sqrt;
  }

  Matrix s1 = matmul(matmul(p, c1), transpose(p));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (s1(i, j) + s1(j, i)) / 2.0;
      s1(i, j) = v;
      s1(j, i) = v;
    }
  const EighResult es = jacobi_eigh(s1);

  CspModel model;
  model.filters = matmul(transpose(es.vectors), p);
  model.eigenvalues = es.values;
  model.k = k;
  model.w_max.assign(model.filters.row(0), model.filters.row(0) + n);
  model.w_min.assign(model.filters.row(n - 1), model.filters.row(n - 1) + n);
  model.selected_max = top_k_by_magnitude(model.w_max, k);
  model.selected_min = top_k_by_magnitude(model.w_min, k);
  return model;
}

std::string CspModel::to_json() const {
  nlohmann::json j;
  j["channels"] = channels();
  j["k"] = k;
  j["eigenvalues"] = eigenvalues;
  j["w_max"] = w_max;
  j["w_min"] = w_min;
  j["selected_max"] = selected_max;
  j["selected_min"] = selected_min;
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < filters.rows(); ++i)
    rows.push_back(
        std::vector<double>(filters.row(i), filters.row(i) + filters.cols()));
  j["filters"] = std::move(rows);
  return j.dump(2) + "\n";
}

CspModel CspModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  CspModel m;
  const std::size_t n = j.at("channels").get<std::size_t>();
  m.k = j.at("k").get<std::size_t>();
  m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  m.w_max = j.at("w_max").get<std::vector<double>>();
  m.w_min = j.at("w_min").get<std::vector<double>>();
  m.selected_max = j.at("selected_max").get<std::vector<std::size_t>>();
  m.selected_min = j.at("selected_min").get<std::vector<std::size_t>>();
  const auto& rows = j.at("filters");
  m.filters = Matrix(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (row.size() != n) throw std::invalid_argument("filters row width mismatch");
    std::copy(row.begin(), row.end(), m.filters.row(i));
  }
  if (m.w_max.size() != n || m.w_min.size() != n ||
      m.selected_max.size() != m.k || m.selected_min.size() != m.k)
    throw std::invalid_argument("csp model fields inconsistent");
  return m;
}

}  // namespace neurodecode::csp
