#include "nrank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "nrank/rng.hpp"
#include "nrank/textio.hpp"

namespace nrank {

void EvalOptions::validate() const {
  if (ks.empty()) throw std::invalid_argument("eval: ks must be non-empty");
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("eval: cutoffs must be >= 1");
  }
  if (sessions_per_seed < 1) throw std::invalid_argument("eval: sessions_per_seed must be >= 1");
  if (seeds.size() < 2) throw std::invalid_argument("eval: need at least 2 seeds");
  if (candidate_pool < 0) throw std::invalid_argument("eval: candidate_pool must be >= 0");
}

namespace {

std::vector<double> model_scores(const BoostedRanker& model, const RankingDataset& dataset) {
  std::vector<double> scores(dataset.examples.size());
  for (std::size_t r = 0; r < dataset.examples.size(); ++r) {
    scores[r] = model.score(dataset.examples[r].features);
  }
  return scores;
}

double mean_group_dcg_from_scores(const RankingDataset& dataset, std::span<const double> scores,
                                  LabelKind gain_label, int k) {
  const auto ranges = dataset.group_ranges();
  if (ranges.empty()) throw std::invalid_argument("mean_group_dcg: empty dataset");
  std::vector<double> gains;
  std::vector<ItemId> ids;
  double total = 0.0;
  for (const auto& [begin, end] : ranges) {
    const std::size_t len = end - begin;
    gains.resize(len);
    ids.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      gains[i] = dataset.examples[begin + i].label(gain_label);
      ids[i] = dataset.examples[begin + i].item_id;
    }
    total += ranked_dcg_at_k(scores.subspan(begin, len), gains, ids, k);
  }
  return total / static_cast<double>(ranges.size());
}

}  // namespace

double mean_group_dcg(const BoostedRanker& model, const RankingDataset& dataset,
                      LabelKind gain_label, int k) {
  if (dataset.examples.empty()) throw std::invalid_argument("mean_group_dcg: empty dataset");
  if (model.feature_dim != dataset.feature_dim) {
    throw std::invalid_argument("mean_group_dcg: model/dataset feature dimension mismatch");
  }
  const std::vector<double> scores = model_scores(model, dataset);
  return mean_group_dcg_from_scores(dataset, scores, gain_label, k);
}

double percent_loss(double dcg_base, double dcg_pred) {
  if (!(dcg_base > 0.0)) throw std::invalid_argument("percent_loss: base DCG must be > 0");
  if (dcg_pred < 0.0) throw std::invalid_argument("percent_loss: predictor DCG must be >= 0");
  return 100.0 * (dcg_base - dcg_pred) / dcg_base;
}

double EvaluationMatrix::at(int k, LabelKind predictor, LabelKind truth) const {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == k) {
      const auto p = std::find(kPredictorLabels.begin(), kPredictorLabels.end(), predictor);
      if (p == kPredictorLabels.end()) {
        throw std::invalid_argument("EvaluationMatrix: predictor must be S1/S2/S3");
      }
      return entries[i][static_cast<std::size_t>(p - kPredictorLabels.begin())]
                    [static_cast<int>(truth)];
    }
  }
  throw std::invalid_argument("EvaluationMatrix: unknown cutoff k=" + std::to_string(k));
}

EvaluationMatrix build_matrix(const std::map<LabelKind, BoostedRanker>& models,
                              const RankingDataset& test, const std::vector<int>& ks) {
  for (LabelKind kind : kAllLabelKinds) {
    if (!models.contains(kind)) {
      throw std::invalid_argument("build_matrix: missing model for label " +
                                  std::string(label_kind_name(kind)));
    }
  }
  if (test.examples.empty()) throw std::invalid_argument("build_matrix: empty test split");

  // Scores depend only on the model; DCG then varies by gain column
  // and cutoff. Score each model once.
  std::map<LabelKind, std::vector<double>> scores;
  for (const auto& [kind, model] : models) {
    if (model.feature_dim != test.feature_dim) {
      throw std::invalid_argument("build_matrix: model/dataset feature dimension mismatch");
    }
    scores[kind] = model_scores(model, test);
  }

  EvaluationMatrix matrix;
  matrix.ks = ks;
  matrix.entries.resize(ks.size());
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const int k = ks[ki];
    std::array<double, kNumLabelKinds> baseline_dcg{};
    for (LabelKind truth : kAllLabelKinds) {
      baseline_dcg[static_cast<int>(truth)] =
          mean_group_dcg_from_scores(test, scores.at(truth), truth, k);
    }
    for (std::size_t p = 0; p < kPredictorLabels.size(); ++p) {
      const LabelKind predictor = kPredictorLabels[p];
      for (LabelKind truth : kAllLabelKinds) {
        const double base = baseline_dcg[static_cast<int>(truth)];
        const double pred = predictor == truth
                                ? base
                                : mean_group_dcg_from_scores(test, scores.at(predictor), truth, k);
        matrix.entries[ki][p][static_cast<int>(truth)] = percent_loss(base, pred);
      }
    }
  }
  return matrix;
}

WelchResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw std::invalid_argument("welch_t_test: need at least 2 observations per sample");
  }
  const auto n_a = static_cast<double>(sample_a.size());
  const auto n_b = static_cast<double>(sample_b.size());
  const double mean_a = std::accumulate(sample_a.begin(), sample_a.end(), 0.0) / n_a;
  const double mean_b = std::accumulate(sample_b.begin(), sample_b.end(), 0.0) / n_b;
  double var_a = 0.0, var_b = 0.0;
  for (double x : sample_a) var_a += (x - mean_a) * (x - mean_a);
  for (double x : sample_b) var_b += (x - mean_b) * (x - mean_b);
  var_a /= n_a - 1.0;
  var_b /= n_b - 1.0;

  WelchResult result;
  const double se2 = var_a / n_a + var_b / n_b;
  if (se2 == 0.0) {
    // Degenerate: both samples constant. Equal means carry no
    // evidence of a difference; unequal means are a sure difference.
    result.t = 0.0;
    result.df = n_a + n_b - 2.0;
    result.p = (mean_a == mean_b) ? 1.0 : 0.0;
    return result;
  }
  result.t = (mean_a - mean_b) / std::sqrt(se2);
  result.df = se2 * se2 /
              (var_a * var_a / (n_a * n_a * (n_a - 1.0)) + var_b * var_b / (n_b * n_b * (n_b - 1.0)));
  boost::math::students_t_distribution<double> dist(result.df);
  result.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t)));
  return result;
}

std::vector<double> score_table(const World& world, const BoostedRanker& model) {
  const auto num_users = static_cast<std::size_t>(world.users.size());
  const auto num_items = static_cast<std::size_t>(world.items.size());
  std::vector<double> table(num_users * num_items);
  for (std::size_t u = 0; u < num_users; ++u) {
    for (std::size_t a = 0; a < num_items; ++a) {
      const auto features =
          extract_features(world, static_cast<UserId>(u), static_cast<ItemId>(a));
      table[u * num_items + a] = model.score(features);
    }
  }
  return table;
}

RankingPolicy table_policy(const World& world, std::vector<double> scores) {
  const std::size_t num_items = world.items.size();
  if (scores.size() != world.users.size() * num_items) {
    throw std::invalid_argument("table_policy: score table shape mismatch");
  }
  return [scores = std::move(scores), num_items](const World&, UserId user,
                                                 std::vector<ItemId> candidates) {
    std::vector<double> candidate_scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      candidate_scores[i] =
          scores[static_cast<std::size_t>(user) * num_items + static_cast<std::size_t>(candidates[i])];
    }
    const auto order = rank_by_score(candidate_scores, candidates);
    std::vector<ItemId> ranked(candidates.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranked[r] = candidates[order[r]];
    return ranked;
  };
}

OnlineReport online_compare(const World& world, const std::map<LabelKind, BoostedRanker>& models,
                            const ScalarizationWeights& weights_l1,
                            const ScalarizationWeights& weights_l2, const EvalOptions& options) {
  options.validate();
  for (LabelKind kind : kPredictorLabels) {
    if (!models.contains(kind)) {
      throw std::invalid_argument("online_compare: missing model for label " +
                                  std::string(label_kind_name(kind)));
    }
  }

  OnlineReport report;
  report.seeds = options.seeds;
  report.sessions_per_seed = options.sessions_per_seed;
  report.candidate_pool = options.candidate_pool;

  std::map<LabelKind, std::vector<double>> per_seed_q;
  for (LabelKind kind : kPredictorLabels) {
    const RankingPolicy policy = table_policy(world, score_table(world, models.at(kind)));
    VariantStats stats;
    stats.label = kind;
    for (std::uint64_t seed : options.seeds) {
      // Identical seed -> identical users, candidate slates, and
      // session randomness for each variant: a paired design.
      QEstimate estimate = true_q(world, policy, weights_l1, weights_l2,
                                  options.sessions_per_seed, seed, options.candidate_pool);
      stats.per_seed.push_back(estimate);
      per_seed_q[kind].push_back(estimate.mean);
    }
    const auto n = static_cast<double>(stats.per_seed.size());
    for (const QEstimate& e : stats.per_seed) {
      stats.q_mean += e.mean / n;
      stats.l1_mean += e.l1_mean / n;
      stats.l2_mean += e.l2_mean / n;
      stats.clicks_mean += e.clicks_mean / n;
    }
    double var = 0.0;
    for (const QEstimate& e : stats.per_seed) {
      var += (e.mean - stats.q_mean) * (e.mean - stats.q_mean);
    }
    if (stats.per_seed.size() > 1) {
      var /= n - 1.0;
      stats.q_stderr = std::sqrt(var / n);
    }
    report.variants.push_back(std::move(stats));
  }

  const std::array<std::pair<LabelKind, LabelKind>, 3> comparisons = {
      std::pair{LabelKind::S2, LabelKind::S1}, std::pair{LabelKind::S3, LabelKind::S1},
      std::pair{LabelKind::S3, LabelKind::S2}};
  for (const auto& [high, low] : comparisons) {
    PairVerdict verdict;
    verdict.high = high;
    verdict.low = low;
    verdict.welch = welch_t_test(per_seed_q.at(high), per_seed_q.at(low));
    verdict.p_adjusted = std::min(1.0, verdict.welch.p * static_cast<double>(comparisons.size()));
    verdict.significant = verdict.p_adjusted < 0.05;
    const auto mean = [&](LabelKind kind) {
      const auto& v = per_seed_q.at(kind);
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    verdict.mean_difference = mean(high) - mean(low);
    verdict.direction_ok = verdict.mean_difference > 0.0;
    report.verdicts.push_back(verdict);
  }
  return report;
}

void write_matrix_reports(const std::string& tsv_path, const std::string& text_path,
                          const EvaluationMatrix& matrix, const std::string& meta_comment) {
  {
    std::ofstream out(tsv_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_matrix_reports: cannot open " + tsv_path);
    if (!meta_comment.empty()) out << "# " << meta_comment << '\n';
    out << "dcg_at\tpredictor";
    for (LabelKind truth : kAllLabelKinds) out << '\t' << label_kind_name(truth);
    out << '\n';
    for (std::size_t ki = 0; ki < matrix.ks.size(); ++ki) {
      for (std::size_t p = 0; p < kPredictorLabels.size(); ++p) {
        out << matrix.ks[ki] << '\t' << label_kind_name(kPredictorLabels[p]);
        for (LabelKind truth : kAllLabelKinds) {
          out << '\t' << format_double(matrix.entries[ki][p][static_cast<int>(truth)]);
        }
        out << '\n';
      }
    }
  }
  {
    std::ofstream out(text_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_matrix_reports: cannot open " + text_path);
    if (!meta_comment.empty()) out << "# " << meta_comment << '\n';
    out << "Offline % loss in DCG of predictor label vs model trained on the true signal\n\n";
    out << std::setw(6) << "DCG@k" << std::setw(10) << "label";
    for (LabelKind truth : kAllLabelKinds) out << std::setw(9) << label_kind_name(truth);
    out << '\n';
    std::ostringstream cell;
    for (std::size_t ki = 0; ki < matrix.ks.size(); ++ki) {
      for (std::size_t p = 0; p < kPredictorLabels.size(); ++p) {
        out << std::setw(6) << matrix.ks[ki] << std::setw(10)
            << label_kind_name(kPredictorLabels[p]);
        for (LabelKind truth : kAllLabelKinds) {
          cell.str("");
          cell << std::fixed << std::setprecision(1)
               << matrix.entries[ki][p][static_cast<int>(truth)];
          out << std::setw(9) << cell.str();
        }
        out << '\n';
      }
      out << '\n';
    }
  }
}

void write_online_reports(const std::string& tsv_path, const std::string& text_path,
                          const OnlineReport& report, const std::string& meta_comment) {
  {
    std::ofstream out(tsv_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_online_reports: cannot open " + tsv_path);
    if (!meta_comment.empty()) out << "# " << meta_comment << '\n';
    out << "variant\tq_mean\tq_stderr\tl1_reward\tl2_reward\tclicks\n";
    for (const VariantStats& v : report.variants) {
      out << label_kind_name(v.label) << '\t' << format_double(v.q_mean) << '\t'
          << format_double(v.q_stderr) << '\t' << format_double(v.l1_mean) << '\t'
          << format_double(v.l2_mean) << '\t' << format_double(v.clicks_mean) << '\n';
    }
    out << "comparison\tq_diff\tt\tdf\tp_raw\tp_bonferroni\tsignificant\n";
    for (const PairVerdict& verdict : report.verdicts) {
      out << label_kind_name(verdict.high) << ">" << label_kind_name(verdict.low) << '\t'
          << format_double(verdict.mean_difference) << '\t' << format_double(verdict.welch.t)
          << '\t' << format_double(verdict.welch.df) << '\t' << format_double(verdict.welch.p)
          << '\t' << format_double(verdict.p_adjusted) << '\t'
          << (verdict.significant ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(text_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_online_reports: cannot open " + text_path);
    if (!meta_comment.empty()) out << "# " << meta_comment << '\n';
    out << "Simulated online metric Q per label variant (" << report.seeds.size() << " seeds x "
        << report.sessions_per_seed << " sessions, candidate pool " << report.candidate_pool
        << ")\n\n";
    out << std::fixed << std::setprecision(4);
    for (const VariantStats& v : report.variants) {
      out << "  " << label_kind_name(v.label) << ": Q = " << v.q_mean << " +/- " << v.q_stderr
          << "  (L1 " << v.l1_mean << ", L2 " << v.l2_mean << ", clicks/session "
          << v.clicks_mean << ")\n";
    }
    out << "\nPairwise Welch t-tests (Bonferroni-corrected, alpha 0.05; '+' marks a\n"
           "non-significant comparison):\n";
    for (const PairVerdict& verdict : report.verdicts) {
      out << "  Q(" << label_kind_name(verdict.high) << ") - Q(" << label_kind_name(verdict.low)
          << ") = " << std::setprecision(4) << verdict.mean_difference
          << "  p_adj = " << std::setprecision(6) << verdict.p_adjusted
          << (verdict.significant ? "" : "  +") << '\n';
    }
  }
}

}  // namespace nrank
