#pragma once

#include "hoi/copula.hpp"
#include "hoi/reference.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hoi::synthetic {

/// Tail-to-tail system: Y drives every source. Y is the last variable.
CovarianceMatrix r_system_cov(int n_sources, double c);

/// Head-to-head system: marginally independent sources all drive Y (last).
CovarianceMatrix s_system_cov(int n_sources, double c);

struct BlockRange {
  int begin = 0;  // first variable
  int size = 0;
};

struct ConcatSystem {
  CovarianceMatrix cov;
  std::vector<BlockRange> blocks;
};

/// Block-diagonal assembly without cross-block dependence.
ConcatSystem block_concat(std::span<const CovarianceMatrix> blocks);

/// T draws from N(0, Σ) as L·z with z standard normal and Σ = L·Lᵀ. Zero pivots
/// of a positive semi-definite Σ are kept at zero, so degenerate directions
/// are reproduced exactly.
DataMatrix sample_gaussian(const CovarianceMatrix& cov, std::int64_t samples, std::uint64_t seed);

/// Population measures of an n-plet straight from the analytic covariance.
reference::HoiValues ground_truth_hoi(const CovarianceMatrix& cov, std::span<const int> nplet);

enum class BlockKind { redundant, synergistic, independent };

struct PgmBlock {
  BlockKind kind = BlockKind::independent;
  int n_sources = 1;
  double c = 1.0;

  int size() const noexcept { return kind == BlockKind::independent ? n_sources : n_sources + 1; }
};

/// Ordered list of blocks, serialized as
///   {"blocks": [{"kind": "R"|"S"|"independent", "n_sources": 3, "c": 1.0}, ...]}
struct PgmSpec {
  std::vector<PgmBlock> blocks;

  int n_vars() const noexcept;
  void validate() const;
  ConcatSystem build() const;
  /// Variable names: b<block>_<kind>_x<j> for sources (j from 1), b<block>_<kind>_y for Y.
  std::vector<std::string> variable_names() const;

  static PgmSpec from_json(const std::string& text);
  std::string to_json() const;
};

}  // namespace hoi::synthetic
