// bvi: one-class detection of anomalous states in multichannel time series
// via Riemannian geometry of covariance matrices.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvi/baselines.hpp"
#include "bvi/channel_select.hpp"
#include "bvi/detector.hpp"
#include "bvi/errors.hpp"
#include "bvi/eval.hpp"
#include "bvi/io_util.hpp"
#include "bvi/signal_io.hpp"
#include "bvi/spd.hpp"
#include "bvi/synth.hpp"

namespace {

using namespace bvi;

SynthSpec spec_from_preset(const std::string& preset, std::uint64_t seed) {
  if (preset == "separable") return synth_separable(seed);
  if (preset == "null") return synth_null(seed);
  if (preset == "stress") return synth_metric_stress(seed);
  if (preset == "chorra14") return synth_chorra14(seed);
  throw ValidationError("unknown preset: " + preset);
}

double resolve_shrinkage(double flag_value, const EpochSet& es) {
  if (flag_value >= 0.0) return flag_value;
  return default_shrinkage(es.window_samples,
                           static_cast<Eigen::Index>(es.channel_labels.size()));
}

std::vector<std::pair<double, double>> parse_bands(const std::string& s) {
  std::vector<std::pair<double, double>> bands;
  for (const std::string& tok : split(s, ',')) {
    const std::vector<std::string> edges = split(tok, '-');
    if (edges.size() != 2)
      throw ValidationError("band '" + tok + "' must look like low-high");
    bands.emplace_back(parse_double(edges[0], 0), parse_double(edges[1], 0));
  }
  if (bands.empty()) throw ValidationError("empty band grid");
  return bands;
}

void write_scores(const ScoreSeries& s, const std::vector<int>* classes,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << "epoch_index,delta,condition";
  if (classes) out << ",class";
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << s[i].epoch_index << ',' << format_g(s[i].delta, 15) << ','
        << to_string(s[i].label);
    if (classes) out << ',' << (*classes)[i];
    out << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Riemannian one-class detector for multichannel recordings"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate synthetic recordings");
  std::string synth_preset = "separable";
  std::string synth_spec_path, synth_out_ref, synth_out_alt, synth_save_spec;
  std::uint64_t synth_seed = 0;
  bool synth_airflow = false;
  synth->add_option("--preset", synth_preset,
                    "separable | null | stress | chorra14");
  synth->add_option("--spec", synth_spec_path, "Synth spec file (overrides preset)");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--out-ref", synth_out_ref, "Reference recording path")
      ->required();
  synth->add_option("--out-alt", synth_out_alt, "Altered recording path")
      ->required();
  synth->add_option("--save-spec", synth_save_spec, "Write the resolved spec");
  synth->add_flag("--airflow", synth_airflow,
                  "Emit air-flow recordings instead of EEG-like ones");

  // ---- preprocess ----
  auto* prep = app.add_subcommand("preprocess",
                                  "Band-pass, decimate, window, reject");
  std::string prep_in, prep_out, prep_condition = "unknown";
  PreprocessConfig pp;
  prep->add_option("--in", prep_in)->required();
  prep->add_option("--out", prep_out)->required();
  prep->add_option("--low", pp.low_cut_hz, "Low cutoff Hz");
  prep->add_option("--high", pp.high_cut_hz, "High cutoff Hz");
  prep->add_option("--order", pp.fir_order, "FIR order (0 = default)");
  prep->add_option("--downsample", pp.downsample_to_hz,
                   "Target rate Hz (0 = keep)");
  prep->add_option("--window", pp.window_s, "Window length s");
  prep->add_option("--overlap", pp.overlap_frac, "Overlap fraction");
  prep->add_option("--amp-thresh", pp.amp_thresh,
                   "Amplitude rejection threshold (0 = off)");
  prep->add_option("--condition", prep_condition, "SV | SN | LD | unknown");

  // ---- train ----
  auto* tr = app.add_subcommand("train", "Fit prototypes on reference epochs");
  std::string tr_epochs, tr_metric = "log-euclidean", tr_out;
  int tr_k = 3, tr_l = 25;
  std::uint64_t tr_seed = 0;
  double tr_shrinkage = -1.0;
  tr->add_option("--epochs", tr_epochs)->required();
  tr->add_option("--metric", tr_metric);
  tr->add_option("--K", tr_k, "Number of prototypes");
  tr->add_option("--L", tr_l, "Learning matrices");
  tr->add_option("--seed", tr_seed);
  tr->add_option("--shrinkage", tr_shrinkage, "Shrinkage (negative = auto)");
  tr->add_option("--out", tr_out)->required();

  // ---- calibrate ----
  auto* cal = app.add_subcommand("calibrate", "Set kappa from held-out scores");
  std::string cal_model, cal_epochs, cal_out;
  double cal_spec = 0.95;
  cal->add_option("--model", cal_model)->required();
  cal->add_option("--epochs", cal_epochs)->required();
  cal->add_option("--specificity", cal_spec);
  cal->add_option("--out", cal_out)->required();

  // ---- score ----
  auto* sc = app.add_subcommand("score", "Score epochs against a model");
  std::string sc_model, sc_epochs, sc_out;
  sc->add_option("--model", sc_model)->required();
  sc->add_option("--epochs", sc_epochs)->required();
  sc->add_option("--out", sc_out)->required();

  // ---- evaluate ----
  auto* ev = app.add_subcommand("evaluate", "V-fold AUC");
  std::string ev_ref, ev_alt, ev_metric = "log-euclidean", ev_out;
  int ev_k = 3, ev_l = 25, ev_v = 10, ev_jobs = 1;
  std::uint64_t ev_seed = 0;
  double ev_shrinkage = -1.0;
  ev->add_option("--ref", ev_ref)->required();
  ev->add_option("--alt", ev_alt)->required();
  ev->add_option("--metric", ev_metric);
  ev->add_option("--K", ev_k);
  ev->add_option("--L", ev_l);
  ev->add_option("--V", ev_v);
  ev->add_option("--seed", ev_seed);
  ev->add_option("--shrinkage", ev_shrinkage);
  ev->add_option("--jobs", ev_jobs);
  ev->add_option("--out", ev_out, "Result table (default: stdout only)");

  // ---- sweep-band ----
  auto* sb = app.add_subcommand("sweep-band", "AUC per frequency band");
  std::string sb_ref, sb_alt, sb_bands = "0-4,4-8,8-12,8-24,8-30,12-24", sb_out;
  std::string sb_metric = "log-euclidean";
  PreprocessConfig sb_pp;
  int sb_k = 3, sb_l = 25, sb_v = 10, sb_jobs = 1;
  std::uint64_t sb_seed = 0;
  double sb_shrinkage = -1.0;
  sb->add_option("--ref", sb_ref, "Reference recording")->required();
  sb->add_option("--alt", sb_alt, "Altered recording")->required();
  sb->add_option("--bands", sb_bands, "Comma list of low-high pairs");
  sb->add_option("--downsample", sb_pp.downsample_to_hz);
  sb->add_option("--window", sb_pp.window_s);
  sb->add_option("--overlap", sb_pp.overlap_frac);
  sb->add_option("--amp-thresh", sb_pp.amp_thresh);
  sb->add_option("--metric", sb_metric);
  sb->add_option("--K", sb_k);
  sb->add_option("--L", sb_l);
  sb->add_option("--V", sb_v);
  sb->add_option("--seed", sb_seed);
  sb->add_option("--shrinkage", sb_shrinkage);
  sb->add_option("--jobs", sb_jobs);
  sb->add_option("--out", sb_out)->required();

  // ---- sweep-kl ----
  auto* skl = app.add_subcommand("sweep-kl", "AUC over the K x L grid");
  std::string skl_ref, skl_alt, skl_metric = "log-euclidean", skl_out;
  int skl_kmin = 1, skl_kmax = 7, skl_lmin = 20, skl_lmax = 40, skl_lstep = 5;
  int skl_v = 10, skl_jobs = 1;
  std::uint64_t skl_seed = 0;
  double skl_shrinkage = -1.0;
  skl->add_option("--ref", skl_ref)->required();
  skl->add_option("--alt", skl_alt)->required();
  skl->add_option("--metric", skl_metric);
  skl->add_option("--kmin", skl_kmin);
  skl->add_option("--kmax", skl_kmax);
  skl->add_option("--lmin", skl_lmin);
  skl->add_option("--lmax", skl_lmax);
  skl->add_option("--lstep", skl_lstep);
  skl->add_option("--V", skl_v);
  skl->add_option("--seed", skl_seed);
  skl->add_option("--shrinkage", skl_shrinkage);
  skl->add_option("--jobs", skl_jobs);
  skl->add_option("--out", skl_out)->required();

  // ---- select-channels ----
  auto* sel = app.add_subcommand("select-channels", "Rank channels");
  std::string sel_ref, sel_alt, sel_method = "rra";
  std::string sel_metric = "log-euclidean", sel_out;
  int sel_k = 3, sel_l = 25, sel_v = 10;
  std::uint64_t sel_seed = 0;
  double sel_shrinkage = -1.0;
  bool sel_remove_lowest = false;
  sel->add_option("--ref", sel_ref)->required();
  sel->add_option("--alt", sel_alt)->required();
  sel->add_option("--method", sel_method, "chorra | rra | averaged | csp");
  sel->add_option("--metric", sel_metric);
  sel->add_option("--K", sel_k);
  sel->add_option("--L", sel_l);
  sel->add_option("--V", sel_v);
  sel->add_option("--seed", sel_seed);
  sel->add_option("--shrinkage", sel_shrinkage);
  sel->add_flag("--remove-lowest", sel_remove_lowest,
                "Alternative elimination rule: drop the channel whose absence "
                "yields the lowest AUC");
  sel->add_option("--out", sel_out)->required();

  // ---- electrode-curve ----
  auto* ec = app.add_subcommand("electrode-curve", "AUC per ranking prefix");
  std::string ec_ref, ec_alt, ec_ranking, ec_metric = "log-euclidean", ec_out;
  int ec_k = 3, ec_l = 25, ec_v = 10, ec_jobs = 1;
  std::uint64_t ec_seed = 0;
  double ec_shrinkage = -1.0;
  ec->add_option("--ref", ec_ref)->required();
  ec->add_option("--alt", ec_alt)->required();
  ec->add_option("--ranking", ec_ranking)->required();
  ec->add_option("--metric", ec_metric);
  ec->add_option("--K", ec_k);
  ec->add_option("--L", ec_l);
  ec->add_option("--V", ec_v);
  ec->add_option("--seed", ec_seed);
  ec->add_option("--shrinkage", ec_shrinkage);
  ec->add_option("--jobs", ec_jobs);
  ec->add_option("--out", ec_out)->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    SynthSpec spec = synth_spec_path.empty()
                         ? spec_from_preset(synth_preset, synth_seed)
                         : load_synth_spec(synth_spec_path);
    if (!synth_spec_path.empty()) spec.seed = synth_seed;
    if (!synth_save_spec.empty()) save_synth_spec(spec, synth_save_spec);
    if (synth_airflow) {
      save_recording(generate_airflow(spec, SynthCondition::ref), synth_out_ref);
      save_recording(generate_airflow(spec, SynthCondition::alt), synth_out_alt);
    } else {
      save_recording(generate(spec, SynthCondition::ref), synth_out_ref);
      save_recording(generate(spec, SynthCondition::alt), synth_out_alt);
    }
    return 0;
  }

  if (prep->parsed()) {
    const Recording rec = load_recording(prep_in);
    const EpochSet es =
        preprocess(rec, pp, condition_from_string(prep_condition));
    save_epochs(es, prep_out);
    std::cout << es.size() << " epochs of " << es.window_samples
              << " samples\n";
    return 0;
  }

  if (tr->parsed()) {
    const EpochSet es = load_epochs(tr_epochs);
    if (static_cast<int>(es.size()) < tr_l)
      throw ValidationError("need at least L=" + std::to_string(tr_l) +
                            " epochs; file has " + std::to_string(es.size()));
    TrainingMeta meta;
    meta.shrinkage = resolve_shrinkage(tr_shrinkage, es);
    meta.window_s = es.window_samples / es.sample_rate_hz;
    std::vector<SpdMatrix> reference;
    for (int i = 0; i < tr_l; ++i)
      reference.push_back(sample_covariance(es.epochs[i], meta.shrinkage));
    const DetectorModel model = train(reference, tr_k,
                                      metric_from_string(tr_metric), tr_seed,
                                      meta);
    save_model(model, tr_out);
    return 0;
  }

  if (cal->parsed()) {
    DetectorModel model = load_model(cal_model);
    const EpochSet es = load_epochs(cal_epochs);
    model = calibrate_kappa(model, score(model, es), cal_spec);
    save_model(model, cal_out);
    std::cout << "kappa=" << format_g(*model.kappa, 15) << '\n';
    return 0;
  }

  if (sc->parsed()) {
    const DetectorModel model = load_model(sc_model);
    const EpochSet es = load_epochs(sc_epochs);
    const ScoreSeries s = score(model, es);
    if (model.kappa) {
      const std::vector<int> classes = classify(model, s);
      write_scores(s, &classes, sc_out);
    } else {
      write_scores(s, nullptr, sc_out);
    }
    return 0;
  }

  auto load_cov_pair = [](const std::string& ref_path,
                          const std::string& alt_path) {
    const EpochSet ref = load_epochs(ref_path);
    const EpochSet alt = load_epochs(alt_path);
    if (ref.channel_labels.size() != alt.channel_labels.size())
      throw ValidationError("ref and alt epoch sets have different channels");
    return std::make_tuple(epoch_covariances(ref), epoch_covariances(alt),
                           ref);
  };

  if (ev->parsed()) {
    auto [ref_covs, alt_covs, ref_es] = load_cov_pair(ev_ref, ev_alt);
    DetectorConfig cfg;
    cfg.metric = metric_from_string(ev_metric);
    cfg.k = ev_k;
    cfg.l = ev_l;
    cfg.shrinkage = resolve_shrinkage(ev_shrinkage, ref_es);
    cfg.seed = ev_seed;
    cfg.jobs = ev_jobs;
    const FoldResult fr = kfold_auc(ref_covs, alt_covs, cfg, ev_v);
    std::cout << "mean_auc=" << format_g(fr.mean_auc, 15)
              << " std_error=" << format_g(fr.std_error, 15) << '\n';
    if (!ev_out.empty()) {
      SweepResult sr;
      sr.folds = ev_v;
      sr.cells.push_back(
          {{}, fr.fold_aucs, fr.mean_auc, fr.std_error, true});
      save_sweep(sr, ev_out);
    }
    return 0;
  }

  if (sb->parsed()) {
    const Recording ref_rec = load_recording(sb_ref);
    const Recording alt_rec = load_recording(sb_alt);
    DetectorConfig cfg;
    cfg.metric = metric_from_string(sb_metric);
    cfg.k = sb_k;
    cfg.l = sb_l;
    cfg.shrinkage = sb_shrinkage >= 0.0 ? sb_shrinkage : 0.01;
    cfg.seed = sb_seed;
    cfg.jobs = sb_jobs;
    const SweepResult sr = sweep_band(ref_rec, alt_rec, parse_bands(sb_bands),
                                      sb_pp, cfg, sb_v);
    save_sweep(sr, sb_out);
    return 0;
  }

  if (skl->parsed()) {
    auto [ref_covs, alt_covs, ref_es] = load_cov_pair(skl_ref, skl_alt);
    DetectorConfig cfg;
    cfg.metric = metric_from_string(skl_metric);
    cfg.shrinkage = resolve_shrinkage(skl_shrinkage, ref_es);
    cfg.seed = skl_seed;
    cfg.jobs = skl_jobs;
    std::vector<int> ks, ls;
    for (int k = skl_kmin; k <= skl_kmax; ++k) ks.push_back(k);
    for (int l = skl_lmin; l <= skl_lmax; l += skl_lstep) ls.push_back(l);
    save_sweep(sweep_kl(ref_covs, alt_covs, ks, ls, cfg, skl_v), skl_out);
    return 0;
  }

  if (sel->parsed()) {
    auto [ref_covs, alt_covs, ref_es] = load_cov_pair(sel_ref, sel_alt);
    const RankMethod method = rank_method_from_string(sel_method);
    RankedChannelList list;
    RankProvenance prov;
    prov.seed = sel_seed;
    prov.v = sel_v;
    prov.metric = metric_from_string(sel_metric);
    prov.k = sel_k;
    prov.l = sel_l;
    const double shrinkage = resolve_shrinkage(sel_shrinkage, ref_es);
    if (method == RankMethod::csp) {
      std::vector<SpdMatrix> c0, c1;
      for (const auto& p : ref_covs) c0.push_back(shrink(p, shrinkage));
      for (const auto& p : alt_covs) c1.push_back(shrink(p, shrinkage));
      list = csp_rank(csp_fit(c0, c1));
    } else if (method == RankMethod::chorra) {
      VfoldRankConfig cfg;
      cfg.v = 2;  // single learning period: fold 0 of a 2-way split
      cfg.metric = prov.metric;
      cfg.k = sel_k;
      cfg.l = sel_l;
      cfg.shrinkage = shrinkage;
      cfg.seed = sel_seed;
      const int n = static_cast<int>(ref_covs.size());
      const int hi = n / 2;
      SubsetEval eval_fn = [&](const std::vector<int>& subset) {
        std::vector<SpdMatrix> learn;
        for (int i = 0; i < cfg.l; ++i)
          learn.push_back(shrink(submatrix(ref_covs[i], subset), shrinkage));
        const DetectorModel model =
            train(learn, cfg.k, cfg.metric, cfg.seed);
        std::vector<double> s0, s1;
        for (int i = hi; i < n; ++i)
          s0.push_back(
              score_one(model, shrink(submatrix(ref_covs[i], subset), shrinkage)));
        for (const auto& p : alt_covs)
          s1.push_back(score_one(model, shrink(submatrix(p, subset), shrinkage)));
        return roc_auc(s0, s1).auc;
      };
      std::vector<int> all(ref_es.channel_labels.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
      if (static_cast<int>(ref_covs.size()) < sel_l)
        throw ValidationError("not enough reference epochs for L");
      list = chorra_intra(eval_fn, all, sel_remove_lowest);
    } else {
      VfoldRankConfig cfg;
      cfg.v = sel_v;
      cfg.combine = method;
      cfg.metric = prov.metric;
      cfg.k = sel_k;
      cfg.l = sel_l;
      cfg.shrinkage = shrinkage;
      cfg.seed = sel_seed;
      list = vfold_rank(ref_covs, alt_covs, cfg);
    }
    save_ranking(list, ref_es.channel_labels, prov, sel_out);
    return 0;
  }

  if (ec->parsed()) {
    auto [ref_covs, alt_covs, ref_es] = load_cov_pair(ec_ref, ec_alt);
    DetectorConfig cfg;
    cfg.metric = metric_from_string(ec_metric);
    cfg.k = ec_k;
    cfg.l = ec_l;
    cfg.shrinkage = resolve_shrinkage(ec_shrinkage, ref_es);
    cfg.seed = ec_seed;
    cfg.jobs = ec_jobs;
    const RankedChannelList ranking = load_ranking(ec_ranking);
    save_sweep(electrode_curve(ref_covs, alt_covs, ranking, cfg, ec_v), ec_out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bvi::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const bvi::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
