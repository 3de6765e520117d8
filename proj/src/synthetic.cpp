#include "hoi/synthetic.hpp"

#include "hoi/error.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

namespace hoi::synthetic {

CovarianceMatrix r_system_cov(int n_sources, double c) {
  if (n_sources < 1) throw Error(ErrorCode::InvalidArgument, "R-system needs n_sources >= 1");
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "coupling must be finite");
  const int n = n_sources + 1;
  CovarianceMatrix cov;
  cov.sigma = Eigen::MatrixXd::Constant(n, n, c * c);
  cov.sigma.diagonal().array() += 1.0;
  cov.sigma.col(n - 1).setConstant(c);
  cov.sigma.row(n - 1).setConstant(c);
  cov.sigma(n - 1, n - 1) = 1.0;
  return cov;
}

CovarianceMatrix s_system_cov(int n_sources, double c) {
  if (n_sources < 1) throw Error(ErrorCode::InvalidArgument, "S-system needs n_sources >= 1");
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "coupling must be finite");
  const int n = n_sources + 1;
  CovarianceMatrix cov;
  cov.sigma = Eigen::MatrixXd::Identity(n, n);
  cov.sigma.col(n - 1).setConstant(c);
  cov.sigma.row(n - 1).setConstant(c);
  cov.sigma(n - 1, n - 1) = n_sources * c * c + 1.0;
  return cov;
}

ConcatSystem block_concat(std::span<const CovarianceMatrix> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::InvalidArgument, "block_concat needs blocks");
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.n_vars();
  ConcatSystem sys;
  sys.cov.sigma = Eigen::MatrixXd::Zero(total, total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    const auto k = b.n_vars();
    sys.cov.sigma.block(at, at, k, k) = b.sigma;
    sys.blocks.push_back(BlockRange{static_cast<int>(at), static_cast<int>(k)});
    at += k;
  }
  return sys;
}

DataMatrix sample_gaussian(const CovarianceMatrix& cov, std::int64_t samples, std::uint64_t seed) {
  cov.validate();
  if (samples < 3)
    throw Error(ErrorCode::InsufficientSamples, "sample_gaussian needs T >= 3");
  const int n = static_cast<int>(cov.n_vars());

  // Semi-definite Cholesky: pivots within ε of zero become zero columns.
  const double eps = cholesky_jitter(cov.sigma.data(), n, n);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = cov.sigma(j, j);
    for (int k = 0; k < j; ++k) d -= chol(j, k) * chol(j, k);
    if (d < -eps || !std::isfinite(d))
      throw Error(ErrorCode::NotPositiveDefinite, "covariance is not positive semi-definite");
    if (d <= eps) continue;
    const double piv = std::sqrt(d);
    chol(j, j) = piv;
    for (int i = j + 1; i < n; ++i) {
      double s = cov.sigma(i, j);
      for (int k = 0; k < j; ++k) s -= chol(i, k) * chol(j, k);
      chol(i, j) = s / piv;
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(samples, n);
  for (Eigen::Index t = 0; t < samples; ++t)
    for (int j = 0; j < n; ++j) z(t, j) = normal(rng);

  DataMatrix out;
  out.values = z * chol.transpose();
  return out;
}

reference::HoiValues ground_truth_hoi(const CovarianceMatrix& cov, std::span<const int> nplet) {
  const int n = static_cast<int>(cov.n_vars());
  if (nplet.empty()) throw Error(ErrorCode::InvalidNplet, "empty n-plet");
  for (std::size_t i = 0; i < nplet.size(); ++i) {
    if (nplet[i] < 0 || nplet[i] >= n)
      throw Error(ErrorCode::InvalidNplet, "index out of range");
    if (i > 0 && nplet[i] <= nplet[i - 1])
      throw Error(ErrorCode::InvalidNplet, "n-plet indices must be strictly increasing");
  }
  return reference::nplet_hoi(cov, nplet, false);
}

// ---------------------------------------------------------------------------

int PgmSpec::n_vars() const noexcept {
  int n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

void PgmSpec::validate() const {
  if (blocks.empty()) throw Error(ErrorCode::InvalidArgument, "PGM spec has no blocks");
  for (const auto& b : blocks) {
    if (b.n_sources < 1) throw Error(ErrorCode::InvalidArgument, "n_sources must be >= 1");
    if (!std::isfinite(b.c)) throw Error(ErrorCode::InvalidArgument, "c must be finite");
  }
}

ConcatSystem PgmSpec::build() const {
  validate();
  std::vector<CovarianceMatrix> parts;
  for (const auto& b : blocks) {
    switch (b.kind) {
      case BlockKind::redundant: parts.push_back(r_system_cov(b.n_sources, b.c)); break;
      case BlockKind::synergistic: parts.push_back(s_system_cov(b.n_sources, b.c)); break;
      case BlockKind::independent: {
        CovarianceMatrix id;
        id.sigma = Eigen::MatrixXd::Identity(b.n_sources, b.n_sources);
        parts.push_back(std::move(id));
        break;
      }
    }
  }
  return block_concat(parts);
}

namespace {

std::string_view kind_tag(BlockKind k) {
  switch (k) {
    case BlockKind::redundant: return "R";
    case BlockKind::synergistic: return "S";
    case BlockKind::independent: return "independent";
  }
  return "?";
}

}  // namespace

std::vector<std::string> PgmSpec::variable_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string prefix = "b" + std::to_string(i) + "_" +
                               (b.kind == BlockKind::independent ? std::string("I")
                                                                 : std::string(kind_tag(b.kind)));
    for (int j = 1; j <= b.n_sources; ++j) names.push_back(prefix + "_x" + std::to_string(j));
    if (b.kind != BlockKind::independent) names.push_back(prefix + "_y");
  }
  return names;
}

PgmSpec PgmSpec::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("PGM spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_array())
    throw Error(ErrorCode::InvalidArgument, "PGM spec needs a \"blocks\" array");
  PgmSpec spec;
  for (const auto& item : doc["blocks"]) {
    PgmBlock b;
    const auto kind = item.value("kind", std::string{});
    if (kind == "R" || kind == "r" || kind == "redundant") {
      b.kind = BlockKind::redundant;
    } else if (kind == "S" || kind == "s" || kind == "synergistic") {
      b.kind = BlockKind::synergistic;
    } else if (kind == "independent" || kind == "I" || kind == "i") {
      b.kind = BlockKind::independent;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown block kind \"" + kind + "\"");
    }
    if (!item.contains("n_sources") || !item["n_sources"].is_number_integer())
      throw Error(ErrorCode::InvalidArgument, "block needs an integer n_sources");
    b.n_sources = item["n_sources"].get<int>();
    b.c = item.value("c", 1.0);
    spec.blocks.push_back(b);
  }
  spec.validate();
  return spec;
}

std::string PgmSpec::to_json() const {
  nlohmann::json doc;
  doc["blocks"] = nlohmann::json::array();
  for (const auto& b : blocks) {
    nlohmann::json item{{"kind", std::string(kind_tag(b.kind))}, {"n_sources", b.n_sources}};
    if (b.kind != BlockKind::independent) item["c"] = b.c;
    doc["blocks"].push_back(item);
  }
  return doc.dump(2);
}

}  // namespace hoi::synthetic
