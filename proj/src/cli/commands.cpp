#include "ecglite/cli/commands.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include "ecglite/model_store.hpp"
#include "ecglite/preprocess.hpp"
#include "ecglite/synthetic.hpp"
#include "ecglite/wfdb.hpp"
#include "io_util.hpp"

namespace ecglite::cli {

namespace fs = std::filesystem;

namespace {

kernels::ExecPolicy policy_for(bool parallel) {
  return parallel ? kernels::ExecPolicy::kParallel : kernels::ExecPolicy::kSerial;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

// The training stream is kept apart from the initialization stream so that
// changing the init scheme does not reshuffle batches.
std::uint64_t training_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

std::vector<std::uint8_t> label_bytes(const dataset::SegmentSet& set, std::span<const std::size_t> rows) {
  std::vector<std::uint8_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = static_cast<std::uint8_t>(class_index(set.labels[rows[i]]));
  return out;
}

std::vector<float> gather(const dataset::SegmentSet& set, std::span<const std::size_t> rows) {
  std::vector<float> out;
  out.reserve(rows.size() * set.window());
  for (std::size_t r : rows) {
    const auto s = set.segment(r);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<std::string> discover_records(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".hea") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

PreprocessResult cmd_preprocess(const PreprocessOptions& opt, std::ostream& log) {
  if (opt.data_dir.empty()) {
    throw UsageError(std::string("no data directory: pass --data or set ") + kDataDirEnv);
  }
  if (!fs::is_directory(opt.data_dir)) throw IoError("data directory not found: " + opt.data_dir.string());
  ensure_dir(opt.out);
  const auto names = opt.records.empty() ? discover_records(opt.data_dir) : opt.records;
  if (names.empty()) throw IoError("no .hea records in " + opt.data_dir.string());

  PreprocessResult result;
  std::string summary;
  std::map<std::string, std::size_t> totals;
  for (const auto& name : names) {
    try {
      const auto loaded = wfdb::load_record(opt.data_dir, name);
      const auto clean = preprocess_record(loaded.record, policy_for(opt.parallel));
      save_clean_record(clean, opt.out);
      result.written.push_back(name);
      summary += wfdb::format_summary(loaded.summary);
      std::size_t usable = 0;
      for (const auto& iv : clean.rhythms) {
        if (iv.label == RhythmClass::Other) continue;
        ++usable;
        totals[std::string(class_name(iv.label))] += iv.length();
      }
      if (usable == 0) summary += "  note: no intervals of the nine classes\n";
      summary += '\n';
    } catch (const Error& e) {
      result.failed.push_back(name);
      log << "skipping " << name << ": " << e.what() << '\n';
    }
  }

  summary += "class totals at 128 Hz (samples)\n";
  for (RhythmClass c : kAllClasses) {
    const auto it = totals.find(std::string(class_name(c)));
    summary += "  " + std::string(class_name(c)) + " " + std::to_string(it == totals.end() ? 0 : it->second) + '\n';
  }
  io::write_text(opt.out / "summary.txt", summary);
  log << summary;
  log << result.written.size() << " records written, " << result.failed.size() << " failed\n";
  if (result.written.empty()) throw IoError("every record failed to parse");
  return result;
}

dataset::SegmentSet cmd_segment(const SegmentOptions& opt, std::ostream& log) {
  if (opt.build.stride == 0) throw UsageError("--stride must be at least 1");
  if (opt.build.cap == 0) throw UsageError("--cap must be at least 1");
  if (!(opt.build.train_fraction > 0.0 && opt.build.train_fraction < 1.0)) {
    throw UsageError("--train-fraction must lie in (0, 1)");
  }
  if (!fs::is_directory(opt.in)) throw IoError("input directory not found: " + opt.in.string());
  ensure_dir(opt.out);
  const auto names = list_clean_records(opt.in);
  if (names.empty()) throw IoError("no cleaned records in " + opt.in.string());
  std::vector<CleanRecord> records;
  for (const auto& n : names) records.push_back(load_clean_record(opt.in, n));

  const auto set = dataset::build_segment_set(records, opt.build);
  dataset::save_segment_set(set, opt.out);
  const auto n_train = std::count(set.is_train.begin(), set.is_train.end(), 1);
  log << set.size() << " segments (" << n_train << " train, " << set.size() - static_cast<std::size_t>(n_train)
      << " test)\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    log << "  " << class_name(kAllClasses[c]) << " " << set.class_counts[c] << " weight "
        << fmt("%.4f", set.class_weights[c]) << '\n';
  }
  return set;
}

std::vector<nn::EpochRecord> cmd_train(const TrainOptions& opt, std::ostream& log) {
  if (opt.epochs == 0) throw UsageError("--epochs must be at least 1");
  if (opt.batch_size == 0) throw UsageError("--batch must be at least 1");
  if (!(opt.learning_rate > 0.0)) throw UsageError("--lr must be positive");
  require_exists(opt.dataset, "dataset");
  ensure_dir(opt.out);

  const auto set = dataset::load_segment_set(opt.dataset);
  const auto rows = set.indices(true);
  if (rows.empty()) throw IoError("dataset has no training segments");
  const auto samples = gather(set, rows);
  const auto labels = label_bytes(set, rows);

  auto model = nn::build_arrhythmia_model<float>(opt.seed, set.window());
  nn::TrainConfig cfg;
  cfg.epochs = opt.epochs;
  cfg.batch_size = opt.batch_size;
  cfg.adam.learning_rate = opt.learning_rate;
  cfg.seed = training_seed(opt.seed);
  cfg.class_weights.assign(set.class_weights.begin(), set.class_weights.end());
  cfg.policy = policy_for(opt.parallel);

  log << "training on " << rows.size() << " segments, " << model.parameter_count() << " parameters\n";
  const nn::TrainingData data{samples, labels, set.window()};
  const auto history = nn::train(model, data, cfg, [&](const nn::EpochRecord& r) {
    log << "epoch " << r.epoch << " loss " << fmt("%.6f", r.loss) << " weighted_acc "
        << fmt("%.2f", r.weighted_accuracy) << '\n';
  });

  const auto bytes = model_store::save(model, opt.out / "model.ecgm");
  std::string csv = "epoch,loss,weighted_accuracy\n";
  for (const auto& r : history) csv += std::to_string(r.epoch) + ',' + fmt("%.6f", r.loss) + ',' + fmt("%.4f", r.weighted_accuracy) + '\n';
  io::write_text(opt.out / "history.csv", csv);
  log << "saved " << (opt.out / "model.ecgm").string() << " (" << bytes << " bytes)\n";
  return history;
}

eval::EvalReport cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
  require_exists(opt.model, "model");
  require_exists(opt.dataset, "dataset");
  ensure_dir(opt.out);
  const auto model = model_store::load_arrhythmia(opt.model);
  const auto set = dataset::load_segment_set(opt.dataset);
  const auto rows = set.indices(false);
  if (rows.empty()) throw IoError("dataset has no test segments");
  const auto samples = gather(set, rows);
  const auto truth = label_bytes(set, rows);
  const auto probs = nn::predict(model, samples, set.window(), policy_for(opt.parallel));
  auto report = eval::build_report(truth, probs.data());
  report.model_bytes = static_cast<std::size_t>(fs::file_size(opt.model));
  eval::emit_report(report, opt.out);

  log << "test segments " << rows.size() << '\n'
      << "overall accuracy " << eval::format_rate(report.overall_acc) << '\n'
      << "macro accuracy " << eval::format_rate(report.macro_acc) << '\n'
      << "macro sensitivity " << eval::format_rate(report.macro_se) << '\n'
      << "macro specificity " << eval::format_rate(report.macro_sp) << '\n'
      << "macro AUC " << eval::format_rate(report.macro_auc) << '\n';
  return report;
}

void cmd_infer(const InferOptions& opt, std::ostream& log) {
  if (opt.split != "test" && opt.split != "train" && opt.split != "all") {
    throw UsageError("--split must be test, train or all");
  }
  require_exists(opt.model, "model");
  require_exists(opt.dataset, "dataset");
  ensure_dir(opt.out);
  const auto model = model_store::load_arrhythmia(opt.model);
  const auto set = dataset::load_segment_set(opt.dataset);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (opt.split == "all" || (set.is_train[i] != 0) == (opt.split == "train")) rows.push_back(i);
  }
  const auto probs = nn::predict(model, gather(set, rows), set.window());
  const auto pred = nn::argmax_rows(probs);

  std::string csv = "index,record,onset,truth,predicted";
  for (RhythmClass c : kAllClasses) csv += ",p_" + std::string(class_name(c));
  csv += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = rows[r];
    csv += std::to_string(i) + ',' + set.sources[i].record + ',' + std::to_string(set.sources[i].onset) + ',' +
           std::string(class_name(set.labels[i])) + ',' + std::string(class_name(kAllClasses[pred[r]]));
    for (std::size_t c = 0; c < kNumClasses; ++c) csv += ',' + fmt("%.6f", probs[r * kNumClasses + c]);
    csv += '\n';
  }
  io::write_text(opt.out / "predictions.csv", csv);
  log << rows.size() << " predictions written to " << (opt.out / "predictions.csv").string() << '\n';
}

BenchResult cmd_bench(const BenchOptions& opt, std::ostream& log) {
  if (opt.iterations == 0) throw UsageError("--iterations must be at least 1");
  ensure_dir(opt.out);
  nn::Model<float> model;
  BenchResult result;
  if (opt.model) {
    require_exists(*opt.model, "model");
    model = model_store::load_arrhythmia(*opt.model);
    result.model_bytes = static_cast<std::size_t>(fs::file_size(*opt.model));
  } else {
    model = nn::build_arrhythmia_model<float>(0);
    result.model_bytes = model_store::serialize(model).size();
  }

  // timing fidelity: one thread, serial kernels
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const std::size_t length = model.input_shape().back();
  nn::Tensor<float> x({1, 1, length});
  Rng rng(0);
  for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const nn::ForwardContext ctx{nn::Mode::kInfer, nullptr, kernels::ExecPolicy::kSerial};

  float sink = 0.0f;
  for (std::size_t i = 0; i < opt.warmup; ++i) sink += model.forward(x, ctx)[0];
  std::vector<double> ms(opt.iterations);
  for (auto& t : ms) {
    const auto t0 = std::chrono::steady_clock::now();
    sink += model.forward(x, ctx)[0];
    const auto t1 = std::chrono::steady_clock::now();
    t = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  omp_set_num_threads(threads);
  if (!std::isfinite(sink)) throw NumericError("non-finite model output during benchmark");

  result.stats = eval::latency_stats(ms);
  std::string csv = "iterations,warmup,mean_ms,p50_ms,p95_ms,model_bytes,reference_ms\n";
  csv += std::to_string(result.stats.iterations) + ',' + std::to_string(opt.warmup) + ',' +
         fmt("%.4f", result.stats.mean_ms) + ',' + fmt("%.4f", result.stats.p50_ms) + ',' +
         fmt("%.4f", result.stats.p95_ms) + ',' + std::to_string(result.model_bytes) + ',' +
         fmt("%.3f", kReferenceLatencyMs) + '\n';
  io::write_text(opt.out / "bench.csv", csv);
  log << "single-segment inference over " << result.stats.iterations << " runs (" << opt.warmup << " warmup)\n"
      << "  mean " << fmt("%.4f", result.stats.mean_ms) << " ms\n"
      << "  p50  " << fmt("%.4f", result.stats.p50_ms) << " ms\n"
      << "  p95  " << fmt("%.4f", result.stats.p95_ms) << " ms\n"
      << "  model size " << result.model_bytes << " bytes (" << fmt("%.3f", result.model_bytes / 1048576.0)
      << " MiB)\n"
      << "  reference: " << fmt("%.3f", kReferenceLatencyMs) << " ms on a Raspberry Pi (not a bound)\n";
  return result;
}

std::vector<std::string> cmd_synth(const SynthOptions& opt, std::ostream& log) {
  if (opt.records == 0) throw UsageError("--records must be at least 1");
  if (opt.format != 212 && opt.format != 16) throw UsageError("--format must be 212 or 16");
  if (!(opt.sampling_rate > 0.0) || !(opt.seconds_per_rhythm > 0.0)) {
    throw UsageError("--fs and --seconds must be positive");
  }
  ensure_dir(opt.out);
  std::vector<std::string> names;
  for (std::size_t r = 0; r < opt.records; ++r) {
    synthetic::RecordPlan plan;
    plan.name = "syn" + std::to_string(100 + r);
    plan.sampling_rate = opt.sampling_rate;
    plan.seconds_per_rhythm = opt.seconds_per_rhythm;
    plan.format = opt.format;
    plan.seed = opt.seed + r;
    // every class once, rotated per record
    for (std::size_t c = 0; c < kNumClasses; ++c) plan.rhythm_sequence.push_back(kAllClasses[(c + r) % kNumClasses]);
    synthetic::write_wfdb(synthetic::make_record(plan), opt.format, opt.out);
    names.push_back(plan.name);
  }
  log << names.size() << " records written to " << opt.out.string() << '\n';
  return names;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ECG rhythm classification pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  PreprocessOptions pre;
  std::string data_dir;
  auto* c_pre = app.add_subcommand("preprocess", "clean WFDB records into 128 Hz containers");
  c_pre->add_option("--data", data_dir, "WFDB directory")->envname(kDataDirEnv);
  c_pre->add_option("--records", pre.records, "record names (default: every .hea)")->delimiter(',');
  c_pre->add_option("--out", pre.out, "output directory")->required();
  c_pre->add_flag("--parallel", pre.parallel, "OpenMP filter kernels");

  SegmentOptions seg;
  std::string split_mode = "segment";
  auto* c_seg = app.add_subcommand("segment", "cut, cap, weight and split segments");
  c_seg->add_option("--in", seg.in, "directory of cleaned records")->required();
  c_seg->add_option("--out", seg.out, "dataset directory")->required();
  c_seg->add_option("--lead", seg.build.lead, "channel index")->capture_default_str();
  c_seg->add_option("--stride", seg.build.stride, "window step in samples")->capture_default_str();
  c_seg->add_option("--cap", seg.build.cap, "per-class segment cap")->capture_default_str();
  c_seg->add_option("--seed", seg.build.seed, "random seed")->required();
  c_seg->add_option("--train-fraction", seg.build.train_fraction)->capture_default_str();
  c_seg->add_option("--split-mode", split_mode, "segment or record")
      ->check(CLI::IsMember({"segment", "record"}))
      ->capture_default_str();

  TrainOptions tr;
  auto* c_tr = app.add_subcommand("train", "train the classifier");
  c_tr->add_option("--dataset", tr.dataset)->required();
  c_tr->add_option("--out", tr.out)->required();
  c_tr->add_option("--epochs", tr.epochs)->capture_default_str();
  c_tr->add_option("--batch", tr.batch_size)->capture_default_str();
  c_tr->add_option("--lr", tr.learning_rate)->capture_default_str();
  c_tr->add_option("--seed", tr.seed)->required();
  c_tr->add_flag("--parallel", tr.parallel, "OpenMP kernels (same results)");

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "metrics on the test split");
  c_ev->add_option("--model", ev.model)->required();
  c_ev->add_option("--dataset", ev.dataset)->required();
  c_ev->add_option("--out", ev.out)->required();
  c_ev->add_flag("--parallel", ev.parallel);

  InferOptions inf;
  auto* c_inf = app.add_subcommand("infer", "per-segment class probabilities");
  c_inf->add_option("--model", inf.model)->required();
  c_inf->add_option("--dataset", inf.dataset)->required();
  c_inf->add_option("--split", inf.split)->capture_default_str();
  c_inf->add_option("--out", inf.out)->required();

  BenchOptions be;
  std::string bench_model;
  auto* c_be = app.add_subcommand("bench", "single-segment inference latency");
  c_be->add_option("--model", bench_model, "model file (default: untrained classifier)");
  c_be->add_option("--iterations", be.iterations)->capture_default_str();
  c_be->add_option("--warmup", be.warmup)->capture_default_str();
  c_be->add_option("--out", be.out)->required();

  SynthOptions sy;
  auto* c_sy = app.add_subcommand("synth", "write generated WFDB records");
  c_sy->add_option("--out", sy.out)->required();
  c_sy->add_option("--records", sy.records)->capture_default_str();
  c_sy->add_option("--seconds", sy.seconds_per_rhythm, "length of each rhythm episode")->capture_default_str();
  c_sy->add_option("--fs", sy.sampling_rate)->capture_default_str();
  c_sy->add_option("--format", sy.format)->capture_default_str();
  c_sy->add_option("--seed", sy.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*c_pre) {
      pre.data_dir = data_dir;
      cmd_preprocess(pre, out);
    } else if (*c_seg) {
      seg.build.split_mode = split_mode == "record" ? dataset::SplitMode::kRecord : dataset::SplitMode::kSegment;
      cmd_segment(seg, out);
    } else if (*c_tr) {
      cmd_train(tr, out);
    } else if (*c_ev) {
      cmd_evaluate(ev, out);
    } else if (*c_inf) {
      cmd_infer(inf, out);
    } else if (*c_be) {
      if (!bench_model.empty()) be.model = bench_model;
      cmd_bench(be, out);
    } else if (*c_sy) {
      cmd_synth(sy, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}

}  // namespace ecglite::cli
