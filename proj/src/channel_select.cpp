#include "bvi/channel_select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "bvi/detector.hpp"
#include "bvi/eval.hpp"
#include "bvi/io_util.hpp"

namespace bvi {

std::string to_string(RankMethod m) {
  switch (m) {
    case RankMethod::chorra: return "chorra";
    case RankMethod::rra: return "rra";
    case RankMethod::averaged: return "averaged";
    default: return "csp";
  }
}

RankMethod rank_method_from_string(const std::string& s) {
  if (s == "chorra") return RankMethod::chorra;
  if (s == "rra") return RankMethod::rra;
  if (s == "averaged") return RankMethod::averaged;
  if (s == "csp") return RankMethod::csp;
  throw ValidationError("unknown ranking method: " + s);
}

RankedChannelList chorra_intra(const SubsetEval& eval_fn,
                               const std::vector<int>& initial_channels,
                               bool remove_lowest) {
  if (initial_channels.size() < 3)
    throw ValidationError("chorra_intra needs at least 3 channels");
  std::vector<int> remaining = initial_channels;
  // (channel, AUC of the subset without it), in removal order.
  std::vector<std::pair<int, double>> removed;

  while (remaining.size() > 2) {
    int pick = -1;
    double pick_auc = 0.0;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      std::vector<int> candidate = remaining;
      candidate.erase(candidate.begin() + j);
      const double auc = eval_fn(candidate);
      const bool better = pick < 0 ||
                          (remove_lowest ? auc < pick_auc : auc > pick_auc) ||
                          (auc == pick_auc && remaining[j] < remaining[pick]);
      if (better) {
        pick = static_cast<int>(j);
        pick_auc = auc;
      }
    }
    removed.emplace_back(remaining[pick], pick_auc);
    remaining.erase(remaining.begin() + pick);
  }

  // Order the two survivors by a final leave-one-out comparison.
  const double auc_a = eval_fn({remaining[0]});
  const double auc_b = eval_fn({remaining[1]});
  RankedChannelList out;
  out.method = RankMethod::chorra;
  if (auc_b > auc_a || (auc_b == auc_a && remaining[1] < remaining[0])) {
    std::swap(remaining[0], remaining[1]);
    out.order = {remaining[0], remaining[1]};
    out.scores = {std::max(auc_a, auc_b), std::min(auc_a, auc_b)};
  } else {
    out.order = {remaining[0], remaining[1]};
    out.scores = {auc_a, auc_b};
  }
  // Last removed is the most relevant of the eliminated channels.
  for (auto it = removed.rbegin(); it != removed.rend(); ++it) {
    out.order.push_back(it->first);
    out.scores.push_back(it->second);
  }
  return out;
}

namespace {

std::vector<int> common_channel_set(
    const std::vector<RankedChannelList>& lists) {
  if (lists.empty()) throw ValidationError("no ranking lists to aggregate");
  std::vector<int> channels = lists.front().order;
  std::sort(channels.begin(), channels.end());
  for (const RankedChannelList& l : lists) {
    std::vector<int> c = l.order;
    std::sort(c.begin(), c.end());
    if (c != channels)
      throw ValidationError("ranking lists cover different channel sets");
  }
  return channels;
}

// 1-based position of each channel in each list.
std::map<int, std::vector<double>> positions_by_channel(
    const std::vector<RankedChannelList>& lists) {
  std::map<int, std::vector<double>> pos;
  for (const RankedChannelList& l : lists)
    for (std::size_t i = 0; i < l.order.size(); ++i)
      pos[l.order[i]].push_back(static_cast<double>(i + 1));
  return pos;
}

RankedChannelList order_by_score(const std::vector<int>& channels,
                                 const std::map<int, double>& score,
                                 RankMethod method) {
  std::vector<int> order = channels;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (score.at(a) != score.at(b)) return score.at(a) < score.at(b);
    return a < b;
  });
  RankedChannelList out;
  out.method = method;
  out.order = order;
  for (int c : order) out.scores.push_back(score.at(c));
  return out;
}

}  // namespace

RankedChannelList robust_rank_aggregate(
    const std::vector<RankedChannelList>& lists) {
  const std::vector<int> channels = common_channel_set(lists);
  const std::size_t m = lists.size();
  const double n = static_cast<double>(channels.size());
  const auto pos = positions_by_channel(lists);

  std::map<int, double> score;
  for (int c : channels) {
    std::vector<double> r = pos.at(c);
    for (double& x : r) x /= n;  // normalized ranks in (0, 1]
    std::sort(r.begin(), r.end());
    // Beta order-statistic p-value: only the best rank matters.
    double rho = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double p = boost::math::ibeta(
          static_cast<double>(k + 1), static_cast<double>(m - k), r[k]);
      rho = std::min(rho, p);
    }
    score[c] = std::min(1.0, static_cast<double>(m) * rho);  // Bonferroni
  }
  return order_by_score(channels, score, RankMethod::rra);
}

RankedChannelList averaged_rank_aggregate(
    const std::vector<RankedChannelList>& lists) {
  const std::vector<int> channels = common_channel_set(lists);
  const auto pos = positions_by_channel(lists);
  std::map<int, double> score;
  for (int c : channels) {
    const std::vector<double>& p = pos.at(c);
    score[c] = std::accumulate(p.begin(), p.end(), 0.0) / p.size();
  }
  return order_by_score(channels, score, RankMethod::averaged);
}

RankedChannelList csp_rank_patterns(const Eigen::VectorXd& a_first,
                                    const Eigen::VectorXd& a_last) {
  if (a_first.size() == 0 || a_first.size() != a_last.size())
    throw ValidationError("csp_rank: missing or mismatched patterns");
  const Eigen::Index nc = a_first.size();
  auto desc_indices = [](const Eigen::VectorXd& a) {
    std::vector<int> idx(a.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
      if (std::abs(a(i)) != std::abs(a(j)))
        return std::abs(a(i)) > std::abs(a(j));
      return i < j;
    });
    return idx;
  };
  const std::vector<int> o1 = desc_indices(a_first);
  const std::vector<int> o2 = desc_indices(a_last);

  RankedChannelList out;
  out.method = RankMethod::csp;
  std::vector<bool> taken(nc, false);
  std::size_t i1 = 0, i2 = 0;
  bool from_first = true;
  while (static_cast<Eigen::Index>(out.order.size()) < nc) {
    std::size_t& i = from_first ? i1 : i2;
    const std::vector<int>& o = from_first ? o1 : o2;
    const Eigen::VectorXd& a = from_first ? a_first : a_last;
    while (i < o.size() && taken[o[i]]) ++i;
    if (i < o.size()) {
      taken[o[i]] = true;
      out.order.push_back(o[i]);
      out.scores.push_back(std::abs(a(o[i])));
      ++i;
    }
    from_first = !from_first;
  }
  return out;
}

RankedChannelList csp_rank(const CspModel& model) {
  if (model.a.size() == 0) throw ValidationError("csp_rank: missing patterns");
  return csp_rank_patterns(model.a.col(0), model.a.col(model.a.cols() - 1));
}

RankedChannelList csp_rank_inter(
    const std::vector<Eigen::VectorXd>& a_first_per_subject,
    const std::vector<Eigen::VectorXd>& a_last_per_subject) {
  if (a_first_per_subject.empty() ||
      a_first_per_subject.size() != a_last_per_subject.size())
    throw ValidationError("csp_rank_inter: missing patterns");
  auto average_normalized = [](const std::vector<Eigen::VectorXd>& patterns) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(patterns.front().size());
    for (const Eigen::VectorXd& a : patterns) {
      const double mx = a.cwiseAbs().maxCoeff();
      if (mx <= 0.0) throw ValidationError("csp_rank_inter: zero pattern");
      acc += a.cwiseAbs() / mx;
    }
    return Eigen::VectorXd(acc / static_cast<double>(patterns.size()));
  };
  return csp_rank_patterns(average_normalized(a_first_per_subject),
                           average_normalized(a_last_per_subject));
}

RankedChannelList vfold_rank(const std::vector<Eigen::MatrixXd>& ref_raw,
                             const std::vector<Eigen::MatrixXd>& alt_raw,
                             const VfoldRankConfig& cfg) {
  if (cfg.v < 2) throw ValidationError("vfold_rank: V must be >= 2");
  const int n = static_cast<int>(ref_raw.size());
  if (n < cfg.v * cfg.l)
    throw ValidationError("vfold_rank: need at least " +
                          std::to_string(cfg.v * cfg.l) +
                          " reference epochs; have " + std::to_string(n));
  if (ref_raw.empty() || alt_raw.empty())
    throw ValidationError("vfold_rank: empty epoch set");
  const int nc = static_cast<int>(ref_raw.front().rows());

  std::vector<int> all_channels(nc);
  std::iota(all_channels.begin(), all_channels.end(), 0);

  std::vector<RankedChannelList> lists;
  for (int fold = 0; fold < cfg.v; ++fold) {
    const int lo = static_cast<int>(static_cast<long>(fold) * n / cfg.v);
    const int hi = static_cast<int>(static_cast<long>(fold + 1) * n / cfg.v);
    SubsetEval eval_fn = [&, lo, hi, fold](const std::vector<int>& subset) {
      std::vector<SpdMatrix> learn;
      for (int i = lo; i < lo + cfg.l; ++i)
        learn.push_back(shrink(submatrix(ref_raw[i], subset), cfg.shrinkage));
      DetectorModel model =
          train(learn, cfg.k, cfg.metric,
                cfg.seed + static_cast<std::uint64_t>(fold));
      std::vector<double> s0, s1;
      for (int i = 0; i < n; ++i)
        if (i < lo || i >= hi)
          s0.push_back(score_one(
              model, shrink(submatrix(ref_raw[i], subset), cfg.shrinkage)));
      for (const Eigen::MatrixXd& p : alt_raw)
        s1.push_back(
            score_one(model, shrink(submatrix(p, subset), cfg.shrinkage)));
      return roc_auc(s0, s1).auc;
    };
    lists.push_back(chorra_intra(eval_fn, all_channels));
  }

  switch (cfg.combine) {
    case RankMethod::averaged: return averaged_rank_aggregate(lists);
    case RankMethod::rra: return robust_rank_aggregate(lists);
    default:
      throw ValidationError("vfold_rank combiner must be rra or averaged");
  }
}

void save_ranking(const RankedChannelList& list,
                  const std::vector<std::string>& channel_labels,
                  const RankProvenance& prov, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << "# method=" << to_string(list.method) << " seed=" << prov.seed
      << " V=" << prov.v << " metric=" << to_string(prov.metric)
      << " K=" << prov.k << " L=" << prov.l << '\n';
  out << "rank,channel_index,channel_label,score,method\n";
  for (std::size_t i = 0; i < list.order.size(); ++i) {
    const int ch = list.order[i];
    const std::string label =
        ch >= 0 && ch < static_cast<int>(channel_labels.size())
            ? channel_labels[ch]
            : "ch" + std::to_string(ch);
    out << (i + 1) << ',' << ch << ',' << label << ','
        << format_g(list.scores[i]) << ',' << to_string(list.method) << '\n';
  }
}

RankedChannelList load_ranking(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  RankedChannelList out;
  std::string line;
  long line_no = 0;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_columns) {
      saw_columns = true;  // column header row
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 5)
      throw ParseError("ranking row needs 5 columns", line_no);
    out.order.push_back(static_cast<int>(parse_long(cells[1], line_no)));
    out.scores.push_back(parse_double(cells[3], line_no));
    out.method = rank_method_from_string(cells[4]);
  }
  if (out.order.empty()) throw ParseError("empty ranking file", line_no);
  return out;
}

}  // namespace bvi
