#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bvi/baselines.hpp"
#include "bvi/spd.hpp"

namespace bvi {

enum class RankMethod { chorra, rra, averaged, csp };

std::string to_string(RankMethod m);
RankMethod rank_method_from_string(const std::string& s);

struct RankedChannelList {
  std::vector<int> order;     // most -> least relevant
  std::vector<double> scores; // aligned with order
  RankMethod method = RankMethod::chorra;
};

// AUC of the detector restricted to a channel subset.
using SubsetEval = std::function<double(const std::vector<int>&)>;

// Backward elimination: each round removes the channel whose absence yields
// the highest AUC (least useful first) until 2 channels remain; the two
// survivors are ordered by a final leave-one-out comparison. Set
// remove_lowest to discard instead the channel whose absence yields the
// lowest AUC (the alternative literal reading).
RankedChannelList chorra_intra(const SubsetEval& eval_fn,
                               const std::vector<int>& initial_channels,
                               bool remove_lowest = false);

// Robust rank aggregation: per channel, beta order-statistic score
// rho = min_k BetaCDF(r_(k); k, m-k+1) over normalized ranks, ordered by
// ascending Bonferroni-corrected rho.
RankedChannelList robust_rank_aggregate(
    const std::vector<RankedChannelList>& lists);

// Mean 1-based position across lists, ascending; ties by channel index.
RankedChannelList averaged_rank_aggregate(
    const std::vector<RankedChannelList>& lists);

// Interleave |a_1| and |a_Nc| weights in decreasing order, skipping channels
// already taken.
RankedChannelList csp_rank(const CspModel& model);
RankedChannelList csp_rank_patterns(const Eigen::VectorXd& a_first,
                                    const Eigen::VectorXd& a_last);

// Inter-subject CSP ranking: normalize each subject's end patterns by their
// maximum absolute entry, average, then interleave.
RankedChannelList csp_rank_inter(
    const std::vector<Eigen::VectorXd>& a_first_per_subject,
    const std::vector<Eigen::VectorXd>& a_last_per_subject);

struct VfoldRankConfig {
  int v = 10;
  RankMethod combine = RankMethod::rra;  // rra or averaged
  Metric metric = Metric::log_euclidean;
  int k = 3;
  int l = 25;
  double shrinkage = 0.01;
  std::uint64_t seed = 0;
};

// V lists from V distinct learning periods, combined by the chosen
// aggregator. Covariances are raw (unshrunk); subsets are taken as principal
// submatrices and shrunk per-subset.
RankedChannelList vfold_rank(const std::vector<Eigen::MatrixXd>& ref_raw,
                             const std::vector<Eigen::MatrixXd>& alt_raw,
                             const VfoldRankConfig& cfg);

struct RankProvenance {
  std::uint64_t seed = 0;
  int v = 0;
  Metric metric = Metric::log_euclidean;
  int k = 0;
  int l = 0;
};

void save_ranking(const RankedChannelList& list,
                  const std::vector<std::string>& channel_labels,
                  const RankProvenance& prov, const std::string& path);
RankedChannelList load_ranking(const std::string& path);

}  // namespace bvi
