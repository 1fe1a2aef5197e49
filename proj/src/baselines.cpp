#include "bvi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace bvi {

namespace {

std::string kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::upper_tri_cov: return "upper_tri_cov";
    case FeatureKind::airflow6: return "airflow6";
    case FeatureKind::airflow3: return "airflow3";
    default: return "csp_logvar";
  }
}

double sq_dist(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size())
    throw ValidationError("feature vectors have different lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

FeatureVector vectorize_cov(const SpdMatrix& p) {
  FeatureVector fv;
  fv.kind = FeatureKind::upper_tri_cov;
  const Eigen::Index n = p.dim();
  fv.values.reserve(n * (n + 1) / 2);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = r; c < n; ++c) fv.values.push_back(p.values()(r, c));
  return fv;
}

double gaussian_kernel(const FeatureVector& x1, const FeatureVector& x2,
                       double sigma) {
  if (sigma <= 0.0) throw ValidationError("kernel sigma must be positive");
  return std::exp(-sq_dist(x1, x2) / sigma);
}

double median_sigma(const std::vector<FeatureVector>& train) {
  if (train.size() < 2)
    throw ValidationError("median_sigma needs at least 2 points");
  std::vector<double> d2;
  for (std::size_t i = 0; i < train.size(); ++i)
    for (std::size_t j = i + 1; j < train.size(); ++j)
      d2.push_back(sq_dist(train[i], train[j]));
  std::sort(d2.begin(), d2.end());
  const std::size_t n = d2.size();
  const double med =
      n % 2 == 1 ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
  if (med <= 0.0)
    throw ValidationError("all training points identical; sigma would be 0");
  return med;
}

OcsvmModel ocsvm_train(const std::vector<FeatureVector>& train, double nu,
                       double sigma) {
  const int n = static_cast<int>(train.size());
  if (n < 2) throw ValidationError("ocsvm_train needs at least 2 points");
  if (nu <= 0.0 || nu > 1.0) throw ValidationError("nu must be in (0, 1]");
  const double c = 1.0 / (nu * n);

  Eigen::MatrixXd kmat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      kmat(i, j) = kmat(j, i) = gaussian_kernel(train[i], train[j], sigma);

  // libsvm-style feasible start: fill the box up to sum(alpha) = 1.
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  double remaining = 1.0;
  for (int i = 0; i < n && remaining > 0.0; ++i) {
    alpha(i) = std::min(c, remaining);
    remaining -= alpha(i);
  }
  Eigen::VectorXd grad = kmat * alpha;

  const double kkt_tol = 1e-6;
  const long max_steps = 200000L + 2000L * n;
  double violation = 0.0;
  bool converged = false;
  for (long step = 0; step < max_steps; ++step) {
    int up = -1, down = -1;
    for (int i = 0; i < n; ++i) {
      if (alpha(i) < c - 1e-14 && (up < 0 || grad(i) < grad(up))) up = i;
      if (alpha(i) > 1e-14 && (down < 0 || grad(i) > grad(down))) down = i;
    }
    violation = grad(down) - grad(up);
    if (violation <= kkt_tol) {
      converged = true;
      break;
    }
    const double eta =
        std::max(kmat(up, up) + kmat(down, down) - 2.0 * kmat(up, down),
                 1e-12);
    const double t =
        std::min({violation / eta, c - alpha(up), alpha(down)});
    alpha(up) += t;
    alpha(down) -= t;
    grad += t * (kmat.col(up) - kmat.col(down));
  }
  if (!converged)
    throw ConvergenceError("one-class SVM dual did not reach KKT tolerance",
                           static_cast<int>(max_steps), violation);

  // rho from free support vectors; fall back to the KKT interval midpoint.
  double rho = 0.0;
  int free_count = 0;
  for (int i = 0; i < n; ++i) {
    if (alpha(i) > 1e-10 && alpha(i) < c - 1e-10) {
      rho += grad(i);
      ++free_count;
    }
  }
  if (free_count > 0) {
    rho /= free_count;
  } else {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (alpha(i) > 1e-14) lo = std::max(lo, grad(i));
      if (alpha(i) < c - 1e-14) hi = std::min(hi, grad(i));
    }
    rho = 0.5 * (lo + hi);
  }

  OcsvmModel model;
  model.nu = nu;
  model.sigma = sigma;
  model.rho = rho;
  for (int i = 0; i < n; ++i) {
    if (alpha(i) > 1e-12) {
      model.support_vectors.push_back(train[i]);
      model.alphas.push_back(alpha(i));
    }
  }
  return model;
}

double ocsvm_decision(const OcsvmModel& model, const FeatureVector& x) {
  double f = -model.rho;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.alphas[i] *
         gaussian_kernel(model.support_vectors[i], x, model.sigma);
  return f;
}

double ocsvm_score(const OcsvmModel& model, const FeatureVector& x) {
  return -ocsvm_decision(model, x);
}

FeatureVector airflow_features(const Epoch& epoch, double sample_rate_hz) {
  if (epoch.data.rows() != 1)
    throw ValidationError("airflow_features expects a single-channel epoch");
  const Eigen::VectorXd x = epoch.data.row(0).transpose();
  const Eigen::Index n = x.size();
  if (n < 2) throw ValidationError("airflow epoch too short");

  const double peak = x.maxCoeff();
  const double mean = x.mean();
  double volume = 0.0;
  for (Eigen::Index i = 1; i < n; ++i)
    volume += 0.5 * (x(i - 1) + x(i)) / sample_rate_hz;
  const Eigen::VectorXd centered = x.array() - mean;
  const double m2 = centered.squaredNorm() / n;
  if (m2 <= 0.0)
    throw ValidationError(
        "zero-variance air-flow epoch: skewness and kurtosis are undefined");
  const double variance = centered.squaredNorm() / (n - 1);
  const double m3 = centered.array().cube().sum() / n;
  const double m4 = centered.array().pow(4).sum() / n;
  const double skewness = m3 / std::pow(m2, 1.5);
  const double kurtosis = m4 / (m2 * m2);  // non-excess: Gaussian -> 3

  FeatureVector fv;
  fv.kind = FeatureKind::airflow6;
  fv.values = {peak, mean, volume, variance, skewness, kurtosis};
  return fv;
}

FeatureVector airflow3_select(const FeatureVector& airflow6) {
  if (airflow6.kind != FeatureKind::airflow6 || airflow6.values.size() != 6)
    throw ValidationError("airflow3_select expects an airflow6 vector");
  FeatureVector fv;
  fv.kind = FeatureKind::airflow3;
  fv.values = {airflow6.values[0], airflow6.values[3], airflow6.values[4]};
  return fv;
}

CspModel csp_fit(const std::vector<SpdMatrix>& class0,
                 const std::vector<SpdMatrix>& class1) {
  if (class0.empty() || class1.empty())
    throw ValidationError("csp_fit: both classes must be nonempty");
  const Eigen::MatrixXd s0 = mean(class0, Metric::euclidean).mean.values();
  const Eigen::MatrixXd s1 = mean(class1, Metric::euclidean).mean.values();
  if (s0.rows() != s1.rows())
    throw ValidationError("csp_fit: dimension mismatch between classes");
  const Eigen::MatrixXd composite = s0 + s1;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> chk(composite);
    if (chk.eigenvalues().minCoeff() <=
        1e-12 * chk.eigenvalues().maxCoeff())
      throw ValidationError(
          "csp_fit: composite covariance is rank-deficient; apply shrinkage");
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(s0, composite);
  const Eigen::Index nc = s0.rows();
  CspModel model;
  model.w.resize(nc, nc);
  model.eigenvalues.resize(nc);
  // Descending eigenvalues: first filter maximizes class-0 variance share.
  for (Eigen::Index j = 0; j < nc; ++j) {
    model.w.col(j) = ges.eigenvectors().col(nc - 1 - j);
    model.eigenvalues(j) = ges.eigenvalues()(nc - 1 - j);
  }
  model.a = model.w.inverse().transpose();
  if (nc >= 4)
    model.selected_filters = {0, 1, static_cast<int>(nc) - 2,
                              static_cast<int>(nc) - 1};
  else if (nc == 3)
    model.selected_filters = {0, 1, 2};
  else
    model.selected_filters = {0, static_cast<int>(nc) - 1};
  return model;
}

FeatureVector csp_features(const CspModel& model, const Epoch& epoch) {
  if (epoch.data.rows() != model.w.rows())
    throw ValidationError("csp_features: channel count mismatch");
  FeatureVector fv;
  fv.kind = FeatureKind::csp_logvar;
  for (int j : model.selected_filters) {
    const Eigen::VectorXd proj = model.w.col(j).transpose() * epoch.data;
    const double var = proj.squaredNorm() / (epoch.data.cols() - 1);
    if (var <= 0.0 || !std::isfinite(var))
      throw ValidationError("csp_features: zero projected variance");
    fv.values.push_back(std::log(var));
  }
  return fv;
}

LdaModel lda_fit(const std::vector<FeatureVector>& f0,
                 const std::vector<FeatureVector>& f1) {
  if (f0.size() < 2 || f1.size() < 2)
    throw ValidationError("lda_fit: both classes need at least 2 samples");
  const Eigen::Index d = f0.front().values.size();
  auto class_mean = [d](const std::vector<FeatureVector>& fs) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (const FeatureVector& f : fs)
      mu += Eigen::Map<const Eigen::VectorXd>(f.values.data(), d);
    return Eigen::VectorXd(mu / static_cast<double>(fs.size()));
  };
  const Eigen::VectorXd mu0 = class_mean(f0);
  const Eigen::VectorXd mu1 = class_mean(f1);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  auto accumulate = [&](const std::vector<FeatureVector>& fs,
                        const Eigen::VectorXd& mu) {
    for (const FeatureVector& f : fs) {
      const Eigen::VectorXd x =
          Eigen::Map<const Eigen::VectorXd>(f.values.data(), d) - mu;
      sw += x * x.transpose();
    }
  };
  accumulate(f0, mu0);
  accumulate(f1, mu1);
  const double reg = 1e-3 * sw.trace() / static_cast<double>(d);
  sw += std::max(reg, 1e-12) * Eigen::MatrixXd::Identity(d, d);

  LdaModel model;
  model.weights = sw.ldlt().solve(mu1 - mu0);
  model.bias = model.weights.dot(0.5 * (mu0 + mu1));
  return model;
}

double lda_score(const LdaModel& model, const FeatureVector& x) {
  if (static_cast<Eigen::Index>(x.values.size()) != model.weights.size())
    throw ValidationError("lda_score: feature length mismatch");
  return model.weights.dot(Eigen::Map<const Eigen::VectorXd>(
             x.values.data(), model.weights.size())) -
         model.bias;
}

namespace {

using nlohmann::json;

json fv_to_json(const FeatureVector& fv) {
  return json{{"kind", kind_name(fv.kind)}, {"values", fv.values}};
}

}  // namespace

void save_ocsvm(const OcsvmModel& model, const std::string& path) {
  json j;
  j["type"] = "ocsvm";
  j["nu"] = model.nu;
  j["sigma"] = model.sigma;
  j["rho"] = model.rho;
  j["alphas"] = model.alphas;
  json svs = json::array();
  for (const FeatureVector& fv : model.support_vectors)
    svs.push_back(fv_to_json(fv));
  j["support_vectors"] = std::move(svs);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

OcsvmModel load_ocsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  in >> j;
  if (j.value("type", "") != "ocsvm")
    throw ValidationError("model file is not an ocsvm model");
  OcsvmModel model;
  model.nu = j.at("nu").get<double>();
  model.sigma = j.at("sigma").get<double>();
  model.rho = j.at("rho").get<double>();
  model.alphas = j.at("alphas").get<std::vector<double>>();
  for (const json& sv : j.at("support_vectors")) {
    FeatureVector fv;
    fv.values = sv.at("values").get<std::vector<double>>();
    model.support_vectors.push_back(std::move(fv));
  }
  return model;
}

void save_csp(const CspModel& model, const std::string& path) {
  json j;
  j["type"] = "csp_lda";
  auto mat = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["w"] = mat(model.w);
  j["a"] = mat(model.a);
  j["eigenvalues"] = std::vector<double>(
      model.eigenvalues.data(),
      model.eigenvalues.data() + model.eigenvalues.size());
  j["selected_filters"] = model.selected_filters;
  j["lda_weights"] = std::vector<double>(
      model.lda.weights.data(),
      model.lda.weights.data() + model.lda.weights.size());
  j["lda_bias"] = model.lda.bias;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

CspModel load_csp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  in >> j;
  if (j.value("type", "") != "csp_lda")
    throw ValidationError("model file is not a csp_lda model");
  CspModel model;
  auto mat = [](const json& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = rows.at(0).size();
    Eigen::MatrixXd m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < c; ++k) m(i, k) = rows.at(i).at(k);
    return m;
  };
  model.w = mat(j.at("w"));
  model.a = mat(j.at("a"));
  const auto ev = j.at("eigenvalues").get<std::vector<double>>();
  model.eigenvalues =
      Eigen::Map<const Eigen::VectorXd>(ev.data(), ev.size());
  model.selected_filters = j.at("selected_filters").get<std::vector<int>>();
  const auto lw = j.at("lda_weights").get<std::vector<double>>();
  model.lda.weights = Eigen::Map<const Eigen::VectorXd>(lw.data(), lw.size());
  model.lda.bias = j.at("lda_bias").get<double>();
  return model;
}

}  // namespace bvi
