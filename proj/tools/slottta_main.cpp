#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "slottta/checkpoint.hpp"
#include "slottta/config.hpp"
#include "slottta/csvio.hpp"
#include "slottta/dataset.hpp"
#include "slottta/errors.hpp"
#include "slottta/kernels.hpp"
#include "slottta/metrics.hpp"
#include "slottta/report.hpp"
#include "slottta/selftest.hpp"
#include "slottta/threadpool.hpp"
#include "slottta/trainer.hpp"
#include "slottta/tta.hpp"

namespace fs = std::filesystem;
using namespace slottta;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  int64_t seed = -1;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--config", c.config_path, "JSON config file with flat dotted keys");
  cmd->add_option("--set", c.overrides, "override as key=value (repeatable)")->take_all();
  auto* out = cmd->add_option("--out", c.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--seed", c.seed, "override the run seed");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg.load_file(c.config_path);
  for (const auto& kv : c.overrides) cfg.apply_override(kv);
  if (c.seed >= 0) cfg.apply_override("seed=" + std::to_string(c.seed));
  return cfg;
}

std::string eval_csv(const ParamRegistry<float>& params, const ModelConfig& mcfg, const Dataset& ds, int threads) {
  std::vector<double> ari(ds.samples.size());
  std::vector<double> recon(ds.samples.size());
  parallel_for(
      static_cast<int>(ds.samples.size()),
      [&](int i) {
        const SceneSample& s = ds.samples[static_cast<size_t>(i)];
        SegPrediction<float> pred = predict_dense(params, mcfg, Tensor<float>({mcfg.pixels(), 3}, s.image.data));
        ari[static_cast<size_t>(i)] = adjusted_rand_index(pred.hard_mask, mask_labels(s));
        double sq = 0;
        for (size_t p = 0; p < pred.composite.data.size(); ++p) {
          const double d = pred.composite.data[p] - s.image.data[p];
          sq += d * d;
        }
        recon[static_cast<size_t>(i)] = sq / static_cast<double>(pred.composite.data.size());
      },
      threads);
  std::ostringstream os;
  os << "sample_id,ari_direct,recon\n";
  double ma = 0, mr = 0;
  for (size_t i = 0; i < ari.size(); ++i) {
    os << "sample_" << i << "," << fmt_double(ari[i]) << "," << fmt_double(recon[i]) << "\n";
    ma += ari[i];
    mr += recon[i];
  }
  const double n = ari.empty() ? 1 : static_cast<double>(ari.size());
  ma /= n;
  mr /= n;
  double va = 0, vr = 0;
  for (size_t i = 0; i < ari.size(); ++i) {
    va += (ari[i] - ma) * (ari[i] - ma);
    vr += (recon[i] - mr) * (recon[i] - mr);
  }
  os << "mean," << fmt_double(ma) << "," << fmt_double(mr) << "\n";
  os << "stddev," << fmt_double(std::sqrt(va / n)) << "," << fmt_double(std::sqrt(vr / n)) << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot-centric scene decomposition with per-example test-time adaptation"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, adapt_c, gradsim_c, report_c, selftest_c;
  std::string data_dir, checkpoint_path;
  std::vector<std::string> report_inputs;

  auto* cmd_gen = app.add_subcommand("gen-data", "generate the train/val/test_id/test_ood benchmark");
  add_common(cmd_gen, gen_c);

  auto* cmd_train = app.add_subcommand("train", "train a model on a generated benchmark");
  add_common(cmd_train, train_c);
  cmd_train->add_option("--data", data_dir, "benchmark root (train/ and val/ inside)")->required();

  auto* cmd_eval = app.add_subcommand("eval", "direct inference over one split");
  add_common(cmd_eval, eval_c);
  cmd_eval->add_option("--data", data_dir, "split directory")->required();
  cmd_eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

  auto* cmd_adapt = app.add_subcommand("adapt", "test-time adaptation suite over one split");
  add_common(cmd_adapt, adapt_c);
  cmd_adapt->add_option("--data", data_dir, "split directory")->required();
  cmd_adapt->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

  auto* cmd_gradsim = app.add_subcommand("gradsim", "gradient-cosine vs improvement suite over one split");
  add_common(cmd_gradsim, gradsim_c);
  cmd_gradsim->add_option("--data", data_dir, "split directory")->required();
  cmd_gradsim->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

  auto* cmd_report = app.add_subcommand("report", "summarize suite CSVs into tables and plots");
  add_common(cmd_report, report_c);
  cmd_report->add_option("inputs", report_inputs, "split=path.csv pairs")->required();

  auto* cmd_selftest = app.add_subcommand("selftest", "run the built-in oracle suites");
  add_common(cmd_selftest, selftest_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (cmd_gen->parsed()) {
      RunConfig cfg = resolve(gen_c);
      make_benchmark(gen_c.out, cfg.seed(), cfg.benchmark_sizes(), cfg.get_int("data.height"),
                     cfg.get_int("data.width"));
      cfg.write_snapshot(gen_c.out);
      std::cout << "benchmark written to " << gen_c.out << "\n";
    } else if (cmd_train->parsed()) {
      RunConfig cfg = resolve(train_c);
      const Dataset train = read_dataset((fs::path(data_dir) / "train").string());
      const Dataset val = read_dataset((fs::path(data_dir) / "val").string());
      const TrainResult r =
          fit(train, val, cfg.model_config(), cfg.train_config(), train_c.out, cfg.resolved_json());
      cfg.write_snapshot(train_c.out);
      std::cout << "trained " << r.steps << " steps; best val ARI " << fmt_double(r.best_val_ari) << " at step "
                << r.best_step << "\ncheckpoint: " << r.checkpoint_path << "\n";
    } else if (cmd_eval->parsed()) {
      RunConfig cfg = resolve(eval_c);
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      check_architecture(ck.params, ck.config);
      const Dataset ds = read_dataset(data_dir);
      atomic_write_file((fs::path(eval_c.out) / "eval.csv").string(),
                        eval_csv(ck.params, ck.config, ds, cfg.threads()));
      cfg.write_snapshot(eval_c.out);
      std::cout << "wrote " << (fs::path(eval_c.out) / "eval.csv").string() << "\n";
    } else if (cmd_adapt->parsed() || cmd_gradsim->parsed()) {
      const Common& c = cmd_adapt->parsed() ? adapt_c : gradsim_c;
      RunConfig cfg = resolve(c);
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      check_architecture(ck.params, ck.config);
      const Dataset ds = read_dataset(data_dir);
      const std::string ppm_dir =
          cmd_adapt->parsed() && cfg.get_bool("tta.dump_ppm") ? (fs::path(c.out) / "ppm").string() : "";
      const SuiteResult r = run_suite(ds, ck.params, ck.config, cfg.tta_config(), cfg.threads(), ppm_dir);
      if (cmd_adapt->parsed()) {
        atomic_write_file((fs::path(c.out) / "tta_suite.csv").string(), suite_csv(r));
        std::cout << "wrote " << (fs::path(c.out) / "tta_suite.csv").string() << "\nmean ARI direct "
                  << fmt_double(r.mean_direct) << " -> tta " << fmt_double(r.mean_tta) << "\n";
      } else {
        atomic_write_file((fs::path(c.out) / "gradsim.csv").string(), gradsim_csv(r));
        std::cout << "wrote " << (fs::path(c.out) / "gradsim.csv").string() << "\n";
      }
      cfg.write_snapshot(c.out);
    } else if (cmd_report->parsed()) {
      RunConfig cfg = resolve(report_c);
      std::vector<std::pair<std::string, std::string>> inputs;
      for (const auto& item : report_inputs) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("report input '" + item + "' is not split=path");
        inputs.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      }
      emit_report(inputs, report_c.out);
      cfg.write_snapshot(report_c.out);
      std::cout << "wrote " << (fs::path(report_c.out) / "summary.csv").string() << "\n";
    } else if (cmd_selftest->parsed()) {
      std::cout << "kernels: " << kern::active().name << "\n";
      return run_selftest(std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
