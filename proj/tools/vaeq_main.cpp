// Command-line driver: dataset generation, single-shot equalization, and
// the SER/convergence experiments, all emitting plot-ready CSV plus a run
// manifest that reproduces the outputs byte-for-byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "vaeq/vaeq.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string default_out_dir() {
  if (const char* env = std::getenv("VAEQ_OUT_DIR")) return env;
  return ".";
}

// "a:b:c" inclusive grid, "v1,v2,..." list, or a single value.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, c = 0;
    char colon1 = 0, colon2 = 0;
    std::istringstream ss(text);
    if (!(ss >> a >> colon1 >> b >> colon2 >> c) || colon1 != ':' || colon2 != ':')
      throw UsageError("bad grid '" + text + "', expected start:stop:step");
    if (c <= 0.0) throw UsageError("grid step must be positive");
    if (b < a) throw UsageError("grid stop below start");
    for (double v = a; v <= b + 1e-9 * c; v += c) out.push_back(v);
    return out;
  }
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw UsageError("bad grid value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty grid '" + text + "'");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const long long v = std::stoll(item);
    if (v <= 0) throw UsageError("sizes must be positive, got '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("empty size list");
  return out;
}

vaeq::Padding parse_padding(const std::string& s) {
  if (s == "causal") return vaeq::Padding::kCausal;
  if (s == "centered") return vaeq::Padding::kCentered;
  throw UsageError("padding must be 'causal' or 'centered', got '" + s + "'");
}

json taps_to_json(const vaeq::ComplexSeq& taps) {
  json arr = json::array();
  for (std::size_t i = 0; i < taps.size(); ++i)
    arr.push_back({taps.re[i], taps.im[i]});
  return arr;
}

vaeq::ComplexSeq taps_from_json(const json& arr) {
  vaeq::ComplexSeq taps;
  for (const auto& pair : arr) taps.push_back({pair.at(0), pair.at(1)});
  return taps;
}

// Preset name or a tap file in re<TAB>im format.
vaeq::ComplexSeq resolve_channel(const std::string& channel) {
  if (vaeq::is_channel_preset(channel)) return vaeq::channel_preset(channel);
  if (fs::exists(channel)) return vaeq::read_samples(channel);
  std::string presets;
  for (const auto& n : vaeq::channel_preset_names()) presets += " " + n;
  throw UsageError("unknown channel '" + channel + "'; presets:" + presets +
                   " (or pass a tap file path)");
}

struct ChannelFlags {
  std::string channel = "h1";
  std::string padding = "causal";
};

struct ExperimentFlags {
  std::uint64_t seed = 0;
  std::size_t trials = 20;
  std::size_t test_len = 10000;
  std::size_t train_len = 2000;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool timing = false;
};

struct VaeFlags {
  std::size_t subseq = 128;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t max_updates = 100000;
  std::size_t patience = 200;
  double rel_tol = 1e-4;
  std::size_t hhat_len = 0;  // 0 = derive from channel length
  std::string padding = "centered";
};

struct AdaptFlags {
  std::size_t taps = 15;
  double cma_mu = 1e-3;
  double mmse_mu = 5e-2;
  std::size_t passes = 50;
};

void add_channel_flags(CLI::App* cmd, ChannelFlags& f) {
  cmd->add_option("--channel", f.channel,
                  "channel preset (h1, h2, h3) or tap file path");
  cmd->add_option("--channel-padding", f.padding,
                  "channel convolution padding: causal|centered");
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--trials", f.trials, "independent trials per cell");
  cmd->add_option("--test-len", f.test_len, "test symbols per trial");
  cmd->add_option("--jobs", f.jobs, "worker threads");
  cmd->add_flag("--timing", f.timing, "record wall time per trial (breaks re-run byte identity)");
}

void add_vae_flags(CLI::App* cmd, VaeFlags& f) {
  cmd->add_option("--subseq", f.subseq, "training sub-sequence length N");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--max-updates", f.max_updates, "update budget");
  cmd->add_option("--patience", f.patience, "convergence window (updates)");
  cmd->add_option("--rel-tol", f.rel_tol, "relative improvement threshold");
  cmd->add_option("--hhat-len", f.hhat_len,
                  "channel estimate length (default: channel length, bumped to odd)");
  cmd->add_option("--padding", f.padding, "estimator padding: causal|centered");
}

void add_adapt_flags(CLI::App* cmd, AdaptFlags& f) {
  cmd->add_option("--eq-taps", f.taps, "baseline equalizer taps (odd)");
  cmd->add_option("--cma-mu", f.cma_mu, "CMA step size");
  cmd->add_option("--mmse-mu", f.mmse_mu, "MMSE (N)LMS step size");
  cmd->add_option("--passes", f.passes, "baseline passes over the data");
}

std::size_t auto_hhat_len(std::size_t channel_len, vaeq::Padding padding) {
  if (padding == vaeq::Padding::kCausal) return channel_len;
  return channel_len % 2 == 1 ? channel_len : channel_len + 1;
}

json vae_flags_to_json(const VaeFlags& f, std::size_t resolved_hhat_len) {
  return {{"subseq", f.subseq},       {"lr", f.lr},
          {"beta1", f.beta1},         {"beta2", f.beta2},
          {"eps", f.eps},             {"max_updates", f.max_updates},
          {"patience", f.patience},   {"rel_tol", f.rel_tol},
          {"hhat_len", resolved_hhat_len}, {"padding", f.padding}};
}

vaeq::TrainConfig vae_config_from_json(const json& v) {
  vaeq::TrainConfig cfg;
  cfg.subseq_len = v.at("subseq");
  cfg.learning_rate = v.at("lr");
  cfg.adam_beta1 = v.at("beta1");
  cfg.adam_beta2 = v.at("beta2");
  cfg.adam_eps = v.at("eps");
  cfg.max_updates = v.at("max_updates");
  cfg.patience_window = v.at("patience");
  cfg.rel_tol = v.at("rel_tol");
  cfg.hhat_len = v.at("hhat_len");
  cfg.padding = parse_padding(v.at("padding"));
  return cfg;
}

json adapt_flags_to_json(const AdaptFlags& f) {
  return {{"taps", f.taps},
          {"cma_mu", f.cma_mu},
          {"mmse_mu", f.mmse_mu},
          {"passes", f.passes}};
}

vaeq::AdaptConfig cma_config_from_json(const json& a) {
  vaeq::AdaptConfig cfg;
  cfg.taps = a.at("taps");
  cfg.step_size = a.at("cma_mu");
  cfg.passes = a.at("passes");
  cfg.normalize = false;
  return cfg;
}

vaeq::AdaptConfig mmse_config_from_json(const json& a) {
  vaeq::AdaptConfig cfg;
  cfg.taps = a.at("taps");
  cfg.step_size = a.at("mmse_mu");
  cfg.passes = a.at("passes");
  cfg.normalize = true;
  return cfg;
}

json experiment_common_json(const ChannelFlags& ch, const ExperimentFlags& ex,
                            const vaeq::ComplexSeq& taps) {
  return {{"channel", ch.channel},
          {"channel_taps", taps_to_json(taps)},
          {"channel_padding", ch.padding},
          {"seed", ex.seed},
          {"trials", ex.trials},
          {"test_len", ex.test_len},
          {"jobs", ex.jobs},
          {"timing", ex.timing}};
}

vaeq::ExperimentSpec spec_from_common_json(const json& opts) {
  vaeq::ExperimentSpec spec;
  spec.channel_name = opts.at("channel");
  spec.channel_taps = taps_from_json(opts.at("channel_taps"));
  spec.channel_padding = parse_padding(opts.at("channel_padding"));
  spec.base_seed = opts.at("seed");
  spec.trials = opts.at("trials");
  spec.test_len = opts.at("test_len");
  spec.jobs = opts.at("jobs");
  spec.record_timing = opts.at("timing");
  return spec;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& options, const std::vector<std::string>& outputs,
                    const std::string& started_at) {
  json m;
  m["tool"] = "vaeq";
  m["version"] = vaeq::kVersion;
  m["command"] = command;
  m["options"] = options;
  m["outputs"] = outputs;
  m["started_at"] = started_at;
  m["finished_at"] = iso_utc_now();
  vaeq::write_text_file((fs::path(out_dir) / "manifest").string(), m.dump(2) + "\n");
}

void write_results(const std::string& out_dir,
                   const std::vector<vaeq::TrialResult>& rows) {
  fs::create_directories(out_dir);
  vaeq::write_text_file((fs::path(out_dir) / "results.csv").string(),
                        vaeq::results_csv(rows));
  vaeq::write_text_file((fs::path(out_dir) / "results_summary.csv").string(),
                        vaeq::summary_csv(vaeq::summarize(rows)));
}

// ---------------------------------------------------------------------------
// Command execution from resolved options (shared by the flag path and the
// manifest re-run path).

int run_ser_vs_snr(const json& opts, const std::string& out_dir) {
  vaeq::ExperimentSpec spec = spec_from_common_json(opts);
  spec.train_len = opts.at("train_len");
  for (const auto& v : opts.at("snr_grid")) spec.snr_grid.push_back(v);

  for (const std::string id : opts.at("equalizers")) {
    vaeq::EqualizerRun run;
    run.id = id;
    if (id == "vae") {
      run.kind = vaeq::EqualizerRun::Kind::kVae;
      run.vae = vae_config_from_json(opts.at("vae"));
    } else if (id == "cma") {
      run.kind = vaeq::EqualizerRun::Kind::kCma;
      run.adapt = cma_config_from_json(opts.at("adapt"));
    } else if (id == "mmse") {
      run.kind = vaeq::EqualizerRun::Kind::kMmse;
      run.adapt = mmse_config_from_json(opts.at("adapt"));
    } else {
      throw UsageError("unknown equalizer '" + id + "' (vae, cma, mmse)");
    }
    spec.runs.push_back(std::move(run));
  }
  write_results(out_dir, vaeq::run_experiment(spec));
  return kExitOk;
}

int run_ser_vs_train(const json& opts, const std::string& out_dir) {
  std::vector<vaeq::TrialResult> all;
  for (const std::size_t train_len : opts.at("sizes")) {
    vaeq::ExperimentSpec spec = spec_from_common_json(opts);
    spec.train_len = train_len;
    for (const auto& v : opts.at("snr_grid")) spec.snr_grid.push_back(v);
    const std::string suffix = "-L" + std::to_string(train_len);
    for (const std::string id : opts.at("equalizers")) {
      vaeq::EqualizerRun run;
      run.id = id + suffix;
      if (id == "vae") {
        run.kind = vaeq::EqualizerRun::Kind::kVae;
        run.vae = vae_config_from_json(opts.at("vae"));
        run.vae.subseq_len = std::min(run.vae.subseq_len, train_len);
        if (run.vae.subseq_len < run.vae.hhat_len)
          throw UsageError("training size " + std::to_string(train_len) +
                           " shorter than hhat length");
      } else if (id == "cma") {
        run.kind = vaeq::EqualizerRun::Kind::kCma;
        run.adapt = cma_config_from_json(opts.at("adapt"));
      } else if (id == "mmse") {
        run.kind = vaeq::EqualizerRun::Kind::kMmse;
        run.adapt = mmse_config_from_json(opts.at("adapt"));
      } else {
        throw UsageError("unknown equalizer '" + id + "'");
      }
      spec.runs.push_back(std::move(run));
    }
    auto rows = vaeq::run_experiment(spec);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  std::sort(all.begin(), all.end(), vaeq::detail::row_before);
  write_results(out_dir, all);
  return kExitOk;
}

int run_hhat_robustness(const json& opts, const std::string& out_dir) {
  vaeq::ExperimentSpec spec = spec_from_common_json(opts);
  spec.train_len = opts.at("train_len");
  for (const auto& v : opts.at("snr_grid")) spec.snr_grid.push_back(v);
  for (const std::size_t len : opts.at("lengths")) {
    vaeq::EqualizerRun run;
    run.id = "vae-h" + std::to_string(len);
    run.kind = vaeq::EqualizerRun::Kind::kVae;
    run.vae = vae_config_from_json(opts.at("vae"));
    run.vae.hhat_len = len;
    if (run.vae.padding == vaeq::Padding::kCentered && len % 2 == 0)
      throw UsageError("hhat length " + std::to_string(len) +
                       " must be odd under centered padding");
    spec.runs.push_back(std::move(run));
  }
  write_results(out_dir, vaeq::run_experiment(spec));
  return kExitOk;
}

int run_convergence(const json& opts, const std::string& out_dir) {
  vaeq::ExperimentSpec spec = spec_from_common_json(opts);
  spec.train_len = opts.at("train_len");
  for (const auto& v : opts.at("snr_grid")) spec.snr_grid.push_back(v);
  for (const std::size_t sub : opts.at("subseqs")) {
    vaeq::EqualizerRun run;
    run.id = "vae-n" + std::to_string(sub);
    run.kind = vaeq::EqualizerRun::Kind::kVae;
    run.vae = vae_config_from_json(opts.at("vae"));
    run.vae.subseq_len = std::min(sub, spec.train_len);
    if (run.vae.subseq_len < run.vae.hhat_len)
      throw UsageError("sub-sequence length " + std::to_string(sub) +
                       " shorter than hhat length");
    spec.runs.push_back(std::move(run));
  }
  write_results(out_dir, vaeq::run_experiment(spec));
  return kExitOk;
}

int run_generate(const json& opts, const std::string& out_dir) {
  vaeq::ChannelSpec cs;
  cs.taps = taps_from_json(opts.at("channel_taps"));
  cs.padding = parse_padding(opts.at("channel_padding"));
  const vaeq::Dataset ds =
      vaeq::generate_dataset(cs, opts.at("train_len"), opts.at("snr_db"),
                             opts.at("seed"), opts.at("test_len"));
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  vaeq::write_samples((dir / "train_observed.txt").string(), ds.train_observed);
  vaeq::write_samples((dir / "train_symbols.txt").string(), ds.truth_train_symbols);
  vaeq::write_samples((dir / "test_observed.txt").string(), ds.test_observed);
  vaeq::write_samples((dir / "test_symbols.txt").string(), ds.test_symbols);
  std::cout << "realized SNR: " << vaeq::format_double(ds.realized_snr_db)
            << " dB\n";
  return kExitOk;
}

int run_equalize(const json& opts, const std::string& out_dir) {
  const std::string input = opts.at("input");
  const vaeq::ComplexSeq y = vaeq::read_samples(input);

  vaeq::TrainConfig cfg = vae_config_from_json(opts.at("vae"));
  cfg.init_seed = opts.at("seed");
  const vaeq::TrainResult tr = vaeq::train(y, cfg);

  const vaeq::SymbolPosteriors q = vaeq::decoder_forward(tr.params, y);
  const vaeq::ComplexSeq detected = vaeq::detect_symbols(q);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  vaeq::write_samples((dir / "detected.txt").string(), detected);
  vaeq::write_samples((dir / "hhat.txt").string(), tr.hhat);
  vaeq::write_model((dir / "model.txt").string(), tr.params, tr.hhat,
                    tr.report.sigma2_hat);
  std::string trace = "update,loss\n";
  for (std::size_t i = 0; i < tr.report.loss_trace.size(); ++i)
    trace += std::to_string(i + 1) + "," +
             vaeq::format_double(tr.report.loss_trace[i]) + "\n";
  vaeq::write_text_file((dir / "loss_trace.csv").string(), trace);
  std::cout << "updates: " << tr.report.updates_used
            << (tr.report.converged ? " (converged)" : " (budget exhausted)")
            << ", sigma2_hat: " << vaeq::format_double(tr.report.sigma2_hat)
            << "\n";
  return kExitOk;
}

int dispatch(const std::string& command, const json& opts,
             const std::string& out_dir) {
  const std::string started = iso_utc_now();
  int rc;
  std::vector<std::string> outputs;
  if (command == "ser-vs-snr") {
    rc = run_ser_vs_snr(opts, out_dir);
    outputs = {"results.csv", "results_summary.csv"};
  } else if (command == "ser-vs-train") {
    rc = run_ser_vs_train(opts, out_dir);
    outputs = {"results.csv", "results_summary.csv"};
  } else if (command == "hhat-robustness") {
    rc = run_hhat_robustness(opts, out_dir);
    outputs = {"results.csv", "results_summary.csv"};
  } else if (command == "convergence") {
    rc = run_convergence(opts, out_dir);
    outputs = {"results.csv", "results_summary.csv"};
  } else if (command == "generate") {
    rc = run_generate(opts, out_dir);
    outputs = {"train_observed.txt", "train_symbols.txt", "test_observed.txt",
               "test_symbols.txt"};
  } else if (command == "equalize") {
    rc = run_equalize(opts, out_dir);
    outputs = {"detected.txt", "hhat.txt", "model.txt", "loss_trace.csv"};
  } else {
    throw UsageError("unknown command in manifest: " + command);
  }
  if (rc == kExitOk) write_manifest(out_dir, command, opts, outputs, started);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind channel equalization experiments (VAE, CMA, MMSE)"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = default_out_dir();
  app.add_option("--out", out_dir, "output directory")->envname("VAEQ_OUT_DIR");

  // --- ser-vs-snr -----------------------------------------------------------
  auto* snr_cmd = app.add_subcommand("ser-vs-snr", "SER vs SNR curves");
  ChannelFlags snr_ch;
  ExperimentFlags snr_ex;
  VaeFlags snr_vae;
  AdaptFlags snr_adapt;
  std::string snr_grid_text = "0:10:1";
  std::string snr_equalizers = "vae,cma,mmse";
  add_channel_flags(snr_cmd, snr_ch);
  add_experiment_flags(snr_cmd, snr_ex);
  add_vae_flags(snr_cmd, snr_vae);
  add_adapt_flags(snr_cmd, snr_adapt);
  snr_cmd->add_option("--snr", snr_grid_text, "SNR grid, start:stop:step (dB)");
  snr_cmd->add_option("--train", snr_ex.train_len, "training symbols");
  snr_cmd->add_option("--equalizers", snr_equalizers, "subset of vae,cma,mmse");

  // --- ser-vs-train ---------------------------------------------------------
  auto* train_cmd = app.add_subcommand("ser-vs-train", "SER vs training size");
  ChannelFlags train_ch;
  ExperimentFlags train_ex;
  VaeFlags train_vae;
  AdaptFlags train_adapt;
  std::string train_grid_text = "10";
  std::string train_sizes_text;
  std::string train_equalizers = "vae,cma,mmse";
  add_channel_flags(train_cmd, train_ch);
  add_experiment_flags(train_cmd, train_ex);
  add_vae_flags(train_cmd, train_vae);
  add_adapt_flags(train_cmd, train_adapt);
  train_cmd->add_option("--snr", train_grid_text, "SNR grid (dB)");
  train_cmd->add_option("--sizes", train_sizes_text, "training sizes, comma list")
      ->required();
  train_cmd->add_option("--equalizers", train_equalizers, "subset of vae,cma,mmse");

  // --- hhat-robustness ------------------------------------------------------
  auto* hhat_cmd =
      app.add_subcommand("hhat-robustness", "SER vs SNR for channel-estimate lengths");
  ChannelFlags hhat_ch;
  ExperimentFlags hhat_ex;
  VaeFlags hhat_vae;
  std::string hhat_grid_text = "0:10:1";
  std::string hhat_lengths_text;
  add_channel_flags(hhat_cmd, hhat_ch);
  add_experiment_flags(hhat_cmd, hhat_ex);
  add_vae_flags(hhat_cmd, hhat_vae);
  hhat_cmd->add_option("--snr", hhat_grid_text, "SNR grid (dB)");
  hhat_cmd->add_option("--train", hhat_ex.train_len, "training symbols");
  hhat_cmd->add_option("--lengths", hhat_lengths_text,
                       "hhat lengths, comma list (default: M and 2M-1)");

  // --- convergence ----------------------------------------------------------
  auto* conv_cmd =
      app.add_subcommand("convergence", "parameter updates to convergence vs SNR");
  ChannelFlags conv_ch;
  ExperimentFlags conv_ex;
  VaeFlags conv_vae;
  std::string conv_grid_text = "0:10:2";
  std::string conv_subseq_text = "10,128";
  add_channel_flags(conv_cmd, conv_ch);
  add_experiment_flags(conv_cmd, conv_ex);
  add_vae_flags(conv_cmd, conv_vae);
  conv_cmd->add_option("--snr", conv_grid_text, "SNR grid (dB)");
  conv_cmd->add_option("--train", conv_ex.train_len, "training symbols");
  conv_cmd->add_option("--subseq-grid", conv_subseq_text,
                       "sub-sequence lengths, comma list");

  // --- generate -------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("generate", "write a seeded dataset");
  ChannelFlags gen_ch;
  double gen_snr = 10.0;
  std::size_t gen_train = 2000, gen_test = 10000;
  std::uint64_t gen_seed = 0;
  add_channel_flags(gen_cmd, gen_ch);
  gen_cmd->add_option("--snr", gen_snr, "SNR (dB)");
  gen_cmd->add_option("--train", gen_train, "training symbols");
  gen_cmd->add_option("--test-len", gen_test, "test symbols");
  gen_cmd->add_option("--seed", gen_seed, "seed");

  // --- equalize -------------------------------------------------------------
  auto* eq_cmd = app.add_subcommand("equalize", "blind-equalize a sample file");
  VaeFlags eq_vae;
  std::string eq_input;
  std::uint64_t eq_seed = 0;
  eq_cmd->add_option("--input", eq_input, "input samples, one re<TAB>im per line")
      ->required();
  eq_cmd->add_option("--seed", eq_seed, "init seed");
  add_vae_flags(eq_cmd, eq_vae);

  // --- rerun ----------------------------------------------------------------
  auto* rerun_cmd = app.add_subcommand("rerun", "re-execute a run manifest");
  std::string rerun_manifest;
  unsigned rerun_jobs = 0;
  rerun_cmd->add_option("--manifest", rerun_manifest, "manifest path")->required();
  rerun_cmd->add_option("--jobs", rerun_jobs, "override worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (snr_cmd->parsed()) {
      const vaeq::ComplexSeq taps = resolve_channel(snr_ch.channel);
      const auto padding = parse_padding(snr_vae.padding);
      const std::size_t hlen = snr_vae.hhat_len ? snr_vae.hhat_len
                                                : auto_hhat_len(taps.size(), padding);
      json opts = experiment_common_json(snr_ch, snr_ex, taps);
      opts["train_len"] = snr_ex.train_len;
      opts["snr_grid"] = parse_grid(snr_grid_text);
      json eqs = json::array();
      std::istringstream ss(snr_equalizers);
      std::string id;
      while (std::getline(ss, id, ','))
        if (!id.empty()) eqs.push_back(id);
      if (eqs.empty()) throw UsageError("empty equalizer list");
      opts["equalizers"] = eqs;
      opts["vae"] = vae_flags_to_json(snr_vae, hlen);
      opts["adapt"] = adapt_flags_to_json(snr_adapt);
      return dispatch("ser-vs-snr", opts, out_dir);
    }
    if (train_cmd->parsed()) {
      const vaeq::ComplexSeq taps = resolve_channel(train_ch.channel);
      const auto padding = parse_padding(train_vae.padding);
      const std::size_t hlen = train_vae.hhat_len
                                   ? train_vae.hhat_len
                                   : auto_hhat_len(taps.size(), padding);
      json opts = experiment_common_json(train_ch, train_ex, taps);
      opts["snr_grid"] = parse_grid(train_grid_text);
      const auto sizes = parse_size_list(train_sizes_text);
      opts["sizes"] = sizes;
      json resolved_subseq = json::array();
      for (const std::size_t s : sizes)
        resolved_subseq.push_back(std::min<std::size_t>(train_vae.subseq, s));
      opts["resolved_subseq"] = resolved_subseq;
      json eqs = json::array();
      std::istringstream ss(train_equalizers);
      std::string id;
      while (std::getline(ss, id, ','))
        if (!id.empty()) eqs.push_back(id);
      if (eqs.empty()) throw UsageError("empty equalizer list");
      opts["equalizers"] = eqs;
      opts["vae"] = vae_flags_to_json(train_vae, hlen);
      opts["adapt"] = adapt_flags_to_json(train_adapt);
      return dispatch("ser-vs-train", opts, out_dir);
    }
    if (hhat_cmd->parsed()) {
      const vaeq::ComplexSeq taps = resolve_channel(hhat_ch.channel);
      json opts = experiment_common_json(hhat_ch, hhat_ex, taps);
      opts["train_len"] = hhat_ex.train_len;
      opts["snr_grid"] = parse_grid(hhat_grid_text);
      std::vector<std::size_t> lengths;
      if (hhat_lengths_text.empty()) {
        const std::size_t m = taps.size();
        lengths = {m, 2 * m - 1};
      } else {
        lengths = parse_size_list(hhat_lengths_text);
      }
      opts["lengths"] = lengths;
      opts["vae"] = vae_flags_to_json(hhat_vae, lengths.front());
      return dispatch("hhat-robustness", opts, out_dir);
    }
    if (conv_cmd->parsed()) {
      const vaeq::ComplexSeq taps = resolve_channel(conv_ch.channel);
      const auto padding = parse_padding(conv_vae.padding);
      const std::size_t hlen = conv_vae.hhat_len
                                   ? conv_vae.hhat_len
                                   : auto_hhat_len(taps.size(), padding);
      json opts = experiment_common_json(conv_ch, conv_ex, taps);
      opts["train_len"] = conv_ex.train_len;
      opts["snr_grid"] = parse_grid(conv_grid_text);
      const auto subseqs = parse_size_list(conv_subseq_text);
      for (std::size_t s : subseqs)
        if (s == 0) throw UsageError("sub-sequence length must be positive");
      opts["subseqs"] = subseqs;
      opts["vae"] = vae_flags_to_json(conv_vae, hlen);
      return dispatch("convergence", opts, out_dir);
    }
    if (gen_cmd->parsed()) {
      const vaeq::ComplexSeq taps = resolve_channel(gen_ch.channel);
      json opts = {{"channel", gen_ch.channel},
                   {"channel_taps", taps_to_json(taps)},
                   {"channel_padding", gen_ch.padding},
                   {"snr_db", gen_snr},
                   {"train_len", gen_train},
                   {"test_len", gen_test},
                   {"seed", gen_seed}};
      return dispatch("generate", opts, out_dir);
    }
    if (eq_cmd->parsed()) {
      const std::size_t hlen = eq_vae.hhat_len ? eq_vae.hhat_len : 5;
      json opts = {{"input", eq_input}, {"seed", eq_seed}};
      opts["vae"] = vae_flags_to_json(eq_vae, hlen);
      return dispatch("equalize", opts, out_dir);
    }
    if (rerun_cmd->parsed()) {
      std::ifstream in(rerun_manifest);
      if (!in) {
        std::cerr << "cannot open manifest: " << rerun_manifest << "\n";
        return kExitRuntime;
      }
      json m = json::parse(in, nullptr, true, true);
      json opts = m.at("options");
      if (rerun_jobs > 0 && opts.contains("jobs")) opts["jobs"] = rerun_jobs;
      return dispatch(m.at("command"), opts, out_dir);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "manifest error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
