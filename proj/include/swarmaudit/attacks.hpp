#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "swarmaudit/dataset.hpp"
#include "swarmaudit/errors.hpp"
#include "swarmaudit/nn.hpp"
#include "swarmaudit/partition.hpp"
#include "swarmaudit/rng.hpp"

namespace swarmaudit::attacks {

using nn::PredictionVector;

// predicted: 0 = nonmember, k >= 1 = member of client k.
struct AttackVerdict {
  std::size_t target_index = 0;
  int predicted = 0;
  double score = 0.0;
};

inline constexpr int kNonmember = 0;

// ---------------------------------------------------------------------------
// Metric attacks
// ---------------------------------------------------------------------------

inline double prediction_confidence(const PredictionVector& v) {
  if (v.empty()) throw ArgumentError("prediction_confidence: empty vector");
  return *std::max_element(v.begin(), v.end());
}

// -sum p ln p with 0 ln 0 = 0 (entries at or below the log clamp contribute
// nothing, so one-hot vectors give exactly 0).
inline double prediction_entropy(const PredictionVector& v) {
  if (v.empty()) throw ArgumentError("prediction_entropy: empty vector");
  double h = 0.0;
  for (double p : v)
    if (p > nn::kLogClamp) h -= p * std::log(p);
  return h;
}

enum class MetricKind { kConfidence, kEntropy };

inline double metric_value(MetricKind kind, const PredictionVector& v) {
  return kind == MetricKind::kConfidence ? prediction_confidence(v) : prediction_entropy(v);
}

// Member side of the threshold: confidence >= tau, entropy <= tau.
inline bool metric_predicts_member(MetricKind kind, double value, double tau) {
  return kind == MetricKind::kConfidence ? value >= tau : value <= tau;
}

inline double balanced_accuracy(MetricKind kind, double tau, const std::vector<double>& member_vals,
                                const std::vector<double>& nonmember_vals) {
  if (member_vals.empty() || nonmember_vals.empty())
    throw ArgumentError("balanced_accuracy: empty calibration");
  std::size_t tp = 0, tn = 0;
  for (double v : member_vals)
    if (metric_predicts_member(kind, v, tau)) ++tp;
  for (double v : nonmember_vals)
    if (!metric_predicts_member(kind, v, tau)) ++tn;
  return 0.5 * (static_cast<double>(tp) / member_vals.size() +
                static_cast<double>(tn) / nonmember_vals.size());
}

// Midpoints between consecutive distinct pooled calibration values.
inline std::vector<double> threshold_candidates(const std::vector<double>& member_vals,
                                                const std::vector<double>& nonmember_vals) {
  std::vector<double> pooled;
  pooled.reserve(member_vals.size() + nonmember_vals.size());
  pooled.insert(pooled.end(), member_vals.begin(), member_vals.end());
  pooled.insert(pooled.end(), nonmember_vals.begin(), nonmember_vals.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  std::vector<double> mids;
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i)
    mids.push_back(0.5 * (pooled[i] + pooled[i + 1]));
  if (mids.empty()) mids.push_back(pooled.front());  // all values identical
  return mids;
}

struct ThresholdFit {
  double tau = 0.0;
  double balanced_acc = 0.0;
};

// Picks the midpoint maximizing balanced accuracy; ties go to the smaller tau.
inline ThresholdFit fit_threshold(MetricKind kind, const std::vector<double>& member_vals,
                                  const std::vector<double>& nonmember_vals) {
  const auto candidates = threshold_candidates(member_vals, nonmember_vals);
  ThresholdFit best{candidates.front(),
                    balanced_accuracy(kind, candidates.front(), member_vals, nonmember_vals)};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double acc = balanced_accuracy(kind, candidates[i], member_vals, nonmember_vals);
    if (acc > best.balanced_acc) best = {candidates[i], acc};
  }
  return best;
}

// Thresholded membership calls on target prediction vectors. The calibration
// lists hold metric values computed on data the attacker owns.
inline std::vector<AttackVerdict> metric_attack(MetricKind kind,
                                                const std::vector<double>& member_cal,
                                                const std::vector<double>& nonmember_cal,
                                                const std::vector<PredictionVector>& targets) {
  const auto fit = fit_threshold(kind, member_cal, nonmember_cal);
  std::vector<AttackVerdict> verdicts;
  verdicts.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double v = metric_value(kind, targets[i]);
    verdicts.push_back({i, metric_predicts_member(kind, v, fit.tau) ? 1 : kNonmember, v});
  }
  return verdicts;
}

// ---------------------------------------------------------------------------
// Maximum mean discrepancy
// ---------------------------------------------------------------------------

struct MMDConfig {
  double sigma = 0.0;           // ignored when median_heuristic
  bool median_heuristic = true;
  int kernel_exponent = 2;      // exponent on ||y-y'|| inside exp

  void validate() const {
    if (kernel_exponent != 1 && kernel_exponent != 2)
      throw ArgumentError("mmd: kernel_exponent must be 1 or 2");
    if (!median_heuristic && sigma <= 0.0)
      throw ArgumentError("mmd: sigma must be > 0 when fixed");
  }
};

namespace detail {

inline double kernel(const double* a, const double* b, std::size_t dim, double sigma,
                     int exponent) {
  const double d2 = squared_distance(a, b, dim);
  const double num = exponent == 2 ? d2 : std::sqrt(d2);
  return std::exp(-num / (2.0 * sigma * sigma));
}

inline double kernel(const PredictionVector& a, const PredictionVector& b, double sigma,
                     int exponent) {
  if (a.size() != b.size()) throw ShapeError("mmd: vector length mismatch");
  return kernel(a.data(), b.data(), a.size(), sigma, exponent);
}

}  // namespace detail

// Median pairwise Euclidean distance over the pooled set; 1 when the median
// collapses to 0.
inline double median_pairwise_distance(const std::vector<PredictionVector>& pooled) {
  std::vector<double> dists;
  dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j)
      dists.push_back(
          std::sqrt(squared_distance(pooled[i].data(), pooled[j].data(), pooled[i].size())));
  if (dists.empty()) return 1.0;
  std::sort(dists.begin(), dists.end());
  const std::size_t n = dists.size();
  const double med = (n % 2 == 1) ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
  return med > 0.0 ? med : 1.0;
}

inline double resolve_sigma(const std::vector<PredictionVector>& a,
                            const std::vector<PredictionVector>& b, const MMDConfig& cfg) {
  cfg.validate();
  if (!cfg.median_heuristic) return cfg.sigma;
  std::vector<PredictionVector> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  return median_pairwise_distance(pooled);
}

// Biased (V-statistic) MMD via kernel sums:
//   MMD^2 = mean k(a,a) + mean k(b,b) - 2 mean k(a,b),
// returned as sqrt(max(0, MMD^2)).
inline double mmd_with_sigma(const std::vector<PredictionVector>& a,
                             const std::vector<PredictionVector>& b, double sigma, int exponent) {
  if (a.empty() || b.empty()) throw ArgumentError("mmd: empty input");
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  double s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) s_aa += detail::kernel(a[i], a[j], sigma, exponent);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) s_bb += detail::kernel(b[i], b[j], sigma, exponent);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) s_ab += detail::kernel(a[i], b[j], sigma, exponent);
  const double mmd2 = s_aa / (n * n) + s_bb / (m * m) - 2.0 * s_ab / (n * m);
  return std::sqrt(std::max(0.0, mmd2));
}

inline double mmd(const std::vector<PredictionVector>& a, const std::vector<PredictionVector>& b,
                  const MMDConfig& cfg) {
  return mmd_with_sigma(a, b, resolve_sigma(a, b, cfg), cfg.kernel_exponent);
}

// ---------------------------------------------------------------------------
// Differential attacks
// ---------------------------------------------------------------------------

// Intermediate distances per target, kept so alternative decision rules can
// be audited offline.
struct DiffTraceRow {
  std::size_t target_index = 0;
  std::vector<double> baseline;     // per-client distance without the target
  std::vector<double> with_target;  // per-client distance with the target added
  double member_threshold = 0.0;    // v2 only: member-vs-test distance at k*
};

namespace detail {

// Kernel-sum bookkeeping for add-one-sample MMD updates. sigma is resolved
// once over the pooled reference sets and held fixed across targets, so every
// incremental value equals a fresh mmd_with_sigma() call on the same sigma.
struct DiffContext {
  double sigma = 1.0;
  int exponent = 2;
  std::vector<std::vector<PredictionVector>> refs;  // per client
  std::vector<PredictionVector> nonmembers;

  std::vector<double> s_kk;           // refs_k x refs_k full double sum
  std::vector<double> s_kb;           // refs_k x nonmembers
  Matrix s_block;                     // refs_j x refs_l full cross sums
  double s_bb = 0.0;

  static double cross_sum(const std::vector<PredictionVector>& xs,
                          const std::vector<PredictionVector>& ys, double sigma, int exponent) {
    double s = 0.0;
    for (const auto& x : xs)
      for (const auto& y : ys) s += kernel(x, y, sigma, exponent);
    return s;
  }

  DiffContext(std::vector<std::vector<PredictionVector>> member_refs,
              std::vector<PredictionVector> nonmember_ref, const MMDConfig& cfg)
      : refs(std::move(member_refs)), nonmembers(std::move(nonmember_ref)) {
    cfg.validate();
    if (refs.empty()) throw ArgumentError("differential attack: no member reference sets");
    for (const auto& r : refs)
      if (r.empty()) throw ArgumentError("differential attack: empty member reference set");
    if (nonmembers.empty()) throw ArgumentError("differential attack: empty nonmember reference");

    exponent = cfg.kernel_exponent;
    if (cfg.median_heuristic) {
      std::vector<PredictionVector> pooled = nonmembers;
      for (const auto& r : refs) pooled.insert(pooled.end(), r.begin(), r.end());
      sigma = median_pairwise_distance(pooled);
    } else {
      sigma = cfg.sigma;
    }

    const std::size_t k = refs.size();
    s_kk.resize(k);
    s_kb.resize(k);
    s_block = Matrix(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      s_kk[i] = cross_sum(refs[i], refs[i], sigma, exponent);
      s_kb[i] = cross_sum(refs[i], nonmembers, sigma, exponent);
      s_block(i, i) = s_kk[i];
      for (std::size_t j = i + 1; j < k; ++j) {
        const double s = cross_sum(refs[i], refs[j], sigma, exponent);
        s_block(i, j) = s;
        s_block(j, i) = s;
      }
    }
    s_bb = cross_sum(nonmembers, nonmembers, sigma, exponent);
  }

  static double to_mmd(double s_aa, double n, double s_bb_, double m, double s_ab) {
    return std::sqrt(std::max(0.0, s_aa / (n * n) + s_bb_ / (m * m) - 2.0 * s_ab / (n * m)));
  }

  // mmd(refs_k, nonmembers)
  double baseline_vs_nonmembers(std::size_t k) const {
    return to_mmd(s_kk[k], refs[k].size(), s_bb, nonmembers.size(), s_kb[k]);
  }

  // mmd(refs_k u {y}, nonmembers)
  double with_target_vs_nonmembers(std::size_t k, const std::vector<double>& ref_dot,
                                   double nonmem_dot) const {
    const double n1 = static_cast<double>(refs[k].size()) + 1.0;
    const double s_aa = s_kk[k] + 2.0 * ref_dot[k] + 1.0;  // k(y,y) = 1
    return to_mmd(s_aa, n1, s_bb, nonmembers.size(), s_kb[k] + nonmem_dot);
  }

  // mmd(refs_k, union of other refs)
  double baseline_vs_rest(std::size_t k) const {
    double s_rr = 0.0, s_cross = 0.0, rest = 0.0;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      if (j == k) continue;
      rest += static_cast<double>(refs[j].size());
      s_cross += s_block(k, j);
      for (std::size_t l = 0; l < refs.size(); ++l)
        if (l != k) s_rr += s_block(j, l);
    }
    return to_mmd(s_kk[k], refs[k].size(), s_rr, rest, s_cross);
  }

  // mmd(refs_k u {y}, union of other refs)
  double with_target_vs_rest(std::size_t k, const std::vector<double>& ref_dot) const {
    double s_rr = 0.0, s_cross = 0.0, rest = 0.0;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      if (j == k) continue;
      rest += static_cast<double>(refs[j].size());
      s_cross += s_block(k, j) + ref_dot[j];
      for (std::size_t l = 0; l < refs.size(); ++l)
        if (l != k) s_rr += s_block(j, l);
    }
    const double n1 = static_cast<double>(refs[k].size()) + 1.0;
    return to_mmd(s_kk[k] + 2.0 * ref_dot[k] + 1.0, n1, s_rr, rest, s_cross);
  }

  // kernel sums of one target against each reference set and the nonmembers
  void target_dots(const PredictionVector& y, std::vector<double>& ref_dot,
                   double& nonmem_dot) const {
    ref_dot.assign(refs.size(), 0.0);
    for (std::size_t k = 0; k < refs.size(); ++k)
      for (const auto& x : refs[k]) ref_dot[k] += kernel(x, y, sigma, exponent);
    nonmem_dot = 0.0;
    for (const auto& x : nonmembers) nonmem_dot += kernel(x, y, sigma, exponent);
  }
};

}  // namespace detail

// For each target y and client k the attack compares
//   gap_k = mmd(refs_k u {y}, nonmembers) - mmd(refs_k, nonmembers)
// and attributes y to k* = argmax gap_k (ties to the smallest k) when the gap
// is positive, otherwise calls it a nonmember. Score is the winning gap.
inline std::vector<AttackVerdict> differential_attack_v1(
    const std::vector<PredictionVector>& targets,
    const std::vector<std::vector<PredictionVector>>& member_refs,
    const std::vector<PredictionVector>& nonmember_ref, const MMDConfig& cfg,
    std::vector<DiffTraceRow>* trace = nullptr) {
  const detail::DiffContext ctx(member_refs, nonmember_ref, cfg);
  const std::size_t clients = ctx.refs.size();

  std::vector<double> baseline(clients);
  for (std::size_t k = 0; k < clients; ++k) baseline[k] = ctx.baseline_vs_nonmembers(k);

  std::vector<AttackVerdict> verdicts;
  verdicts.reserve(targets.size());
  std::vector<double> ref_dot;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double nonmem_dot = 0.0;
    ctx.target_dots(targets[t], ref_dot, nonmem_dot);

    std::size_t best_k = 0;
    double best_gap = 0.0;
    std::vector<double> with_target(clients);
    for (std::size_t k = 0; k < clients; ++k) {
      with_target[k] = ctx.with_target_vs_nonmembers(k, ref_dot, nonmem_dot);
      const double gap = with_target[k] - baseline[k];
      if (k == 0 || gap > best_gap) {
        best_gap = gap;
        best_k = k;
      }
    }
    verdicts.push_back(
        {t, best_gap > 0.0 ? static_cast<int>(best_k) + 1 : kNonmember, best_gap});
    if (trace) trace->push_back({t, baseline, with_target, 0.0});
  }
  return verdicts;
}

// For each target y and client k the attack computes the inter-client
// separation a_k = mmd(refs_k u {y}, union of other refs) and how much the
// target changed it against the no-target baseline. Clients differ in how
// separated they already are, so the attribution uses the baseline-relative
// gain: k* = argmax (a_k - baseline_k), ties to the smallest k. The target is
// called a member when the winning separation a_k* exceeds the member-vs-test
// distance mmd(refs_k* u {y}, nonmembers). Score is a_k*. All distances are
// traced for offline auditing of alternative rules.
inline std::vector<AttackVerdict> differential_attack_v2(
    const std::vector<PredictionVector>& targets,
    const std::vector<std::vector<PredictionVector>>& member_refs,
    const std::vector<PredictionVector>& nonmember_ref, const MMDConfig& cfg,
    std::vector<DiffTraceRow>* trace = nullptr) {
  if (member_refs.size() < 2)
    throw ArgumentError("differential_attack_v2: needs at least 2 clients");
  const detail::DiffContext ctx(member_refs, nonmember_ref, cfg);
  const std::size_t clients = ctx.refs.size();

  std::vector<double> baseline(clients);
  for (std::size_t k = 0; k < clients; ++k) baseline[k] = ctx.baseline_vs_rest(k);

  std::vector<AttackVerdict> verdicts;
  verdicts.reserve(targets.size());
  std::vector<double> ref_dot;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double nonmem_dot = 0.0;
    ctx.target_dots(targets[t], ref_dot, nonmem_dot);

    std::size_t best_k = 0;
    std::vector<double> inter(clients);
    for (std::size_t k = 0; k < clients; ++k) {
      inter[k] = ctx.with_target_vs_rest(k, ref_dot);
      if (k > 0 && inter[k] - baseline[k] > inter[best_k] - baseline[best_k]) best_k = k;
    }
    const double member_threshold = ctx.with_target_vs_nonmembers(best_k, ref_dot, nonmem_dot);
    const bool member = inter[best_k] > member_threshold;
    verdicts.push_back({t, member ? static_cast<int>(best_k) + 1 : kNonmember, inter[best_k]});
    if (trace) trace->push_back({t, baseline, inter, member_threshold});
  }
  return verdicts;
}

// ---------------------------------------------------------------------------
// NN-based shadow attacks
// ---------------------------------------------------------------------------

struct ShadowAttackConfig {
  std::vector<int> hidden = {64, 32};
  nn::TrainConfig train{0.01, 0.0, 100, 32, 0};
  bool balance = true;
  std::uint64_t seed = 0;
};

// Trains the binary membership classifier on the attacker's own data: its
// local train set provides the member rows and the shadow pool the non-member
// rows, both pushed through the broadcast global model.
inline nn::Mlp shadow_attack_train(const Dataset& attacker_members, const nn::Mlp& global_model,
                                   const Dataset& nonmember_pool, const ShadowAttackConfig& cfg) {
  if (attacker_members.empty() || nonmember_pool.empty())
    throw ArgumentError("shadow_attack_train: empty member or nonmember pool");
  const auto member_preds = nn::predict_dataset(global_model, attacker_members);
  const auto nonmember_preds = nn::predict_dataset(global_model, nonmember_pool);
  const Dataset attack_set =
      build_attack_set(member_preds, nonmember_preds, cfg.balance, derive_seed(cfg.seed, 1));

  Rng init_rng(derive_seed(cfg.seed, 2));
  nn::Mlp attack_model =
      nn::make_mlp(nn::dense_stack(global_model.output_dim(), cfg.hidden, 2), init_rng);
  nn::TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, 3);
  return nn::train_local(attack_model, attack_set, tc);
}

// One verdict per target; member iff the attack model's member probability is
// at least 0.5. predicted uses 1 as the generic "member" id; callers that
// know the victim map it to a client id.
inline std::vector<AttackVerdict> shadow_attack_infer(const nn::Mlp& attack_model,
                                                      const nn::Mlp& global_model,
                                                      const Dataset& targets) {
  std::vector<AttackVerdict> verdicts;
  verdicts.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto pred = nn::forward(global_model,
                            std::span<const double>(targets.features.row(i), targets.dim()));
    std::sort(pred.begin(), pred.end(), std::greater<>());
    const auto probs = nn::forward(attack_model, pred);
    verdicts.push_back({i, probs[1] >= 0.5 ? 1 : kNonmember, probs[1]});
  }
  return verdicts;
}

// One owner class per victim client plus a nonmember class.
struct OwnerRef {
  int client_id = 0;
  Dataset members;
};

// Multi-class attribution: the attack model distinguishes "member of victim
// k" for every reference set from "nonmember". Rows are balanced by
// undersampling every class to the smallest one when balance is set.
inline std::vector<AttackVerdict> one_to_multi_attack(const nn::Mlp& global_model,
                                                      const std::vector<OwnerRef>& member_refs,
                                                      const Dataset& nonmember_pool,
                                                      const Dataset& targets,
                                                      const ShadowAttackConfig& cfg) {
  if (member_refs.size() < 1) throw ArgumentError("one_to_multi_attack: no member references");
  if (nonmember_pool.empty()) throw ArgumentError("one_to_multi_attack: empty nonmember pool");

  // class 0 = nonmember, class j = member_refs[j-1].client_id
  std::vector<std::vector<PredictionVector>> per_class;
  per_class.push_back(nn::predict_dataset(global_model, nonmember_pool));
  for (const auto& ref : member_refs) {
    if (ref.members.empty()) throw ArgumentError("one_to_multi_attack: empty member reference");
    per_class.push_back(nn::predict_dataset(global_model, ref.members));
  }

  std::size_t per_class_count = SIZE_MAX;
  for (const auto& rows : per_class) per_class_count = std::min(per_class_count, rows.size());

  const int dim = global_model.output_dim();
  Rng sample_rng(derive_seed(cfg.seed, 1));
  std::vector<std::pair<PredictionVector, int>> rows;
  for (std::size_t cls = 0; cls < per_class.size(); ++cls) {
    std::vector<std::size_t> idx(per_class[cls].size());
    std::iota(idx.begin(), idx.end(), 0);
    if (cfg.balance && idx.size() > per_class_count) {
      sample_rng.shuffle(idx);
      idx.resize(per_class_count);
      std::sort(idx.begin(), idx.end());
    }
    for (std::size_t i : idx) {
      auto sorted = per_class[cls][i];
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      rows.emplace_back(std::move(sorted), static_cast<int>(cls));
    }
  }

  Dataset attack_set;
  attack_set.class_count = static_cast<int>(per_class.size());
  attack_set.features = Matrix(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].first.begin(), rows[r].first.end(), attack_set.features.row(r));
    attack_set.labels.push_back(rows[r].second);
  }

  Rng init_rng(derive_seed(cfg.seed, 2));
  nn::Mlp attack_model =
      nn::make_mlp(nn::dense_stack(dim, cfg.hidden, attack_set.class_count), init_rng);
  nn::TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, 3);
  attack_model = nn::train_local(attack_model, attack_set, tc);

  std::vector<AttackVerdict> verdicts;
  verdicts.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto pred = nn::forward(global_model,
                            std::span<const double>(targets.features.row(i), targets.dim()));
    std::sort(pred.begin(), pred.end(), std::greater<>());
    const auto probs = nn::forward(attack_model, pred);
    const std::size_t arg = std::max_element(probs.begin(), probs.end()) - probs.begin();
    const int predicted = arg == 0 ? kNonmember : member_refs[arg - 1].client_id;
    verdicts.push_back({i, predicted, probs[arg]});
  }
  return verdicts;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct AttackMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double baseline = 0.0;                 // 1 / number of task classes
  std::vector<int> class_labels;         // distinct ground-truth labels, sorted
  std::vector<double> precision, recall, f1;
  std::vector<int> support;
  // rows follow class_labels; the extra last column counts predictions
  // outside the task's label set
  std::vector<std::vector<int>> confusion;
};

// Accuracy, per-class precision/recall/F1 (zero division -> 0), macro
// averages, confusion matrix and the blind-guess baseline.
inline AttackMetrics evaluate_attack(const std::vector<AttackVerdict>& verdicts,
                                     const std::vector<int>& ground_truth) {
  if (verdicts.size() != ground_truth.size())
    throw ArgumentError("evaluate_attack: verdicts/ground_truth length mismatch");
  if (verdicts.empty()) throw ArgumentError("evaluate_attack: empty input");

  AttackMetrics m;
  m.class_labels = ground_truth;
  std::sort(m.class_labels.begin(), m.class_labels.end());
  m.class_labels.erase(std::unique(m.class_labels.begin(), m.class_labels.end()),
                       m.class_labels.end());
  const std::size_t classes = m.class_labels.size();
  m.baseline = 1.0 / static_cast<double>(classes);

  auto class_of = [&](int label) -> std::size_t {
    const auto it = std::lower_bound(m.class_labels.begin(), m.class_labels.end(), label);
    if (it == m.class_labels.end() || *it != label) return classes;  // outside the task
    return static_cast<std::size_t>(it - m.class_labels.begin());
  };

  m.confusion.assign(classes, std::vector<int>(classes + 1, 0));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const std::size_t t = class_of(ground_truth[i]);
    const std::size_t p = class_of(verdicts[i].predicted);
    m.confusion[t][p] += 1;
    if (verdicts[i].predicted == ground_truth[i]) ++hits;
  }
  m.accuracy = static_cast<double>(hits) / static_cast<double>(verdicts.size());

  m.precision.assign(classes, 0.0);
  m.recall.assign(classes, 0.0);
  m.f1.assign(classes, 0.0);
  m.support.assign(classes, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    int tp = m.confusion[c][c];
    int pred_c = 0, truth_c = 0;
    for (std::size_t r = 0; r < classes; ++r) pred_c += m.confusion[r][c];
    for (std::size_t p = 0; p <= classes; ++p) truth_c += m.confusion[c][p];
    m.support[c] = truth_c;
    m.precision[c] = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
    m.recall[c] = truth_c > 0 ? static_cast<double>(tp) / truth_c : 0.0;
    m.f1[c] = (m.precision[c] + m.recall[c]) > 0.0
                  ? 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c])
                  : 0.0;
    m.macro_precision += m.precision[c];
    m.macro_recall += m.recall[c];
    m.macro_f1 += m.f1[c];
  }
  m.macro_precision /= static_cast<double>(classes);
  m.macro_recall /= static_cast<double>(classes);
  m.macro_f1 /= static_cast<double>(classes);
  return m;
}

}  // namespace swarmaudit::attacks
