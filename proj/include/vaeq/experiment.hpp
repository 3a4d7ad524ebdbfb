#pragma once

// Multi-trial experiment execution: per-cell seeded dataset generation,
// equalizer fitting, ambiguity-aware scoring, canonical ordering, and CSV
// serialization. Cells are embarrassingly parallel; every cell derives its
// own seed from the experiment values, so results do not depend on worker
// count or execution order.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vaeq/baselines.hpp"
#include "vaeq/channels.hpp"
#include "vaeq/decoder.hpp"
#include "vaeq/eval.hpp"
#include "vaeq/io.hpp"
#include "vaeq/signal.hpp"
#include "vaeq/train.hpp"

namespace vaeq {

struct EqualizerRun {
  enum class Kind { kVae, kCma, kMmse };
  std::string id;
  Kind kind = Kind::kVae;
  TrainConfig vae;
  AdaptConfig adapt;
};

struct ExperimentSpec {
  std::string channel_name = "h1";
  ComplexSeq channel_taps;
  Padding channel_padding = Padding::kCausal;
  std::vector<double> snr_grid;
  std::size_t train_len = 2000;
  std::size_t trials = 20;
  std::size_t test_len = 10000;
  std::uint64_t base_seed = 0;
  std::vector<EqualizerRun> runs;
  unsigned jobs = 1;
  bool record_timing = false;

  void validate() const {
    if (channel_taps.empty()) throw std::invalid_argument("ExperimentSpec: empty channel");
    if (snr_grid.empty()) throw std::invalid_argument("ExperimentSpec: empty SNR grid");
    if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials < 1");
    if (train_len < 1) throw std::invalid_argument("ExperimentSpec: train_len < 1");
    if (test_len < 1) throw std::invalid_argument("ExperimentSpec: test_len < 1");
    if (runs.empty()) throw std::invalid_argument("ExperimentSpec: no equalizers");
    if (jobs < 1) throw std::invalid_argument("ExperimentSpec: jobs < 1");
    ChannelSpec cs{channel_taps, 0.0, channel_padding};
    cs.validate();
    for (const auto& r : runs) {
      if (r.id.empty()) throw std::invalid_argument("ExperimentSpec: empty run id");
      if (r.kind == EqualizerRun::Kind::kVae)
        r.vae.validate();
      else
        r.adapt.validate();
    }
  }
};

struct TrialResult {
  std::string equalizer;
  std::string channel;
  double snr_db = 0.0;
  std::size_t trial = 0;
  bool failed = false;
  double ser = 0.0;
  int rotation_deg = 0;
  std::ptrdiff_t delay = 0;
  std::optional<std::size_t> updates;
  std::optional<double> hhat_distance;
  std::optional<double> wall_time_s;
  std::string fail_reason;
};

struct SummaryRow {
  std::string equalizer;
  std::string channel;
  double snr_db = 0.0;
  double mean_ser = 0.0;
  double median_ser = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

// Deterministic per-cell seed; depends only on experiment values, never on
// grid layout or execution order.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t train_len,
                                double snr_db, std::size_t trial) {
  std::uint64_t s = splitmix64(base_seed);
  s = derive_seed(s, static_cast<std::uint64_t>(train_len));
  s = derive_seed(s, std::bit_cast<std::uint64_t>(snr_db));
  s = derive_seed(s, static_cast<std::uint64_t>(trial));
  return s;
}

namespace detail {

inline std::ptrdiff_t delay_search_radius(const ExperimentSpec& spec) {
  std::size_t d = 1;
  for (const auto& r : spec.runs) {
    if (r.kind == EqualizerRun::Kind::kVae)
      d = std::max(d, r.vae.hhat_len);
    else
      d = std::max(d, r.adapt.taps);
  }
  return static_cast<std::ptrdiff_t>(d);
}

inline std::vector<TrialResult> run_cell(const ExperimentSpec& spec, double snr_db,
                                         std::size_t trial) {
  std::vector<TrialResult> rows;
  rows.reserve(spec.runs.size());
  const std::uint64_t cell_seed =
      trial_seed(spec.base_seed, spec.train_len, snr_db, trial);
  const std::ptrdiff_t radius = delay_search_radius(spec);

  Dataset ds;
  bool dataset_ok = true;
  std::string dataset_err;
  try {
    ChannelSpec cs{spec.channel_taps, 0.0, spec.channel_padding};
    ds = generate_dataset(cs, spec.train_len, snr_db, cell_seed, spec.test_len);
  } catch (const std::exception& e) {
    dataset_ok = false;
    dataset_err = e.what();
  }

  for (const auto& run : spec.runs) {
    TrialResult row;
    row.equalizer = run.id;
    row.channel = spec.channel_name;
    row.snr_db = snr_db;
    row.trial = trial;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!dataset_ok) throw std::runtime_error(dataset_err);
      ComplexSeq estimated;
      if (run.kind == EqualizerRun::Kind::kVae) {
        TrainConfig cfg = run.vae;
        cfg.init_seed = derive_seed(cell_seed, detail::fnv1a(run.id));
        const TrainResult tr = train(ds.train_observed, cfg);
        estimated = detect_symbols(decoder_forward(tr.params, ds.test_observed));
        row.updates = tr.report.updates_used;
        row.hhat_distance = channel_alignment_distance(spec.channel_taps, tr.hhat);
      } else if (run.kind == EqualizerRun::Kind::kCma) {
        const LinearEqualizer eq = cma_train(ds.train_observed, run.adapt);
        estimated = slicer_qpsk(equalize_apply(eq, ds.test_observed));
      } else {
        const LinearEqualizer eq =
            mmse_lms_train(ds.train_observed, ds.truth_train_symbols, run.adapt);
        estimated = slicer_qpsk(equalize_apply(eq, ds.test_observed));
      }
      const AmbiguityResolution res =
          resolve_ambiguity(estimated, ds.test_symbols, radius);
      row.ser = res.ser;
      row.rotation_deg = res.rotation_deg;
      row.delay = res.delay;
    } catch (const std::exception& e) {
      row.failed = true;
      row.fail_reason = e.what();
    }
    if (spec.record_timing) {
      const auto t1 = std::chrono::steady_clock::now();
      row.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline bool row_before(const TrialResult& a, const TrialResult& b) {
  if (a.equalizer != b.equalizer) return a.equalizer < b.equalizer;
  if (a.channel != b.channel) return a.channel < b.channel;
  if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
  return a.trial < b.trial;
}

}  // namespace detail

inline std::vector<TrialResult> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t n_cells = spec.snr_grid.size() * spec.trials;
  std::vector<std::vector<TrialResult>> slots(n_cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_cells) return;
      const double snr = spec.snr_grid[i / spec.trials];
      const std::size_t trial = i % spec.trials;
      slots[i] = detail::run_cell(spec, snr, trial);
    }
  };

  const unsigned workers = std::min<unsigned>(
      spec.jobs, static_cast<unsigned>(std::max<std::size_t>(n_cells, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned i = 0; i + 1 < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  std::vector<TrialResult> rows;
  rows.reserve(n_cells * spec.runs.size());
  for (auto& cell : slots)
    for (auto& r : cell) rows.push_back(std::move(r));
  std::sort(rows.begin(), rows.end(), detail::row_before);
  return rows;
}

inline std::vector<SummaryRow> summarize(const std::vector<TrialResult>& rows) {
  std::vector<SummaryRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    std::vector<double> sers;
    SummaryRow s;
    s.equalizer = rows[i].equalizer;
    s.channel = rows[i].channel;
    s.snr_db = rows[i].snr_db;
    while (j < rows.size() && rows[j].equalizer == s.equalizer &&
           rows[j].channel == s.channel && rows[j].snr_db == s.snr_db) {
      ++s.trials;
      if (rows[j].failed)
        ++s.failures;
      else
        sers.push_back(rows[j].ser);
      ++j;
    }
    if (!sers.empty()) {
      double acc = 0.0;
      for (double v : sers) acc += v;
      s.mean_ser = acc / static_cast<double>(sers.size());
      std::sort(sers.begin(), sers.end());
      const std::size_t mid = sers.size() / 2;
      s.median_ser = sers.size() % 2 == 1
                         ? sers[mid]
                         : 0.5 * (sers[mid - 1] + sers[mid]);
    }
    out.push_back(std::move(s));
    i = j;
  }
  return out;
}

inline std::string results_csv(const std::vector<TrialResult>& rows) {
  std::string out =
      "equalizer,channel,snr_db,trial,ser,rotation_deg,delay,updates,"
      "hhat_distance,wall_time_s,failed\n";
  for (const auto& r : rows) {
    out += r.equalizer;
    out += ',';
    out += r.channel;
    out += ',';
    out += format_double(r.snr_db);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    if (!r.failed) {
      out += format_double(r.ser);
      out += ',';
      out += std::to_string(r.rotation_deg);
      out += ',';
      out += std::to_string(r.delay);
      out += ',';
    } else {
      out += ",,,";
    }
    if (r.updates && !r.failed) out += std::to_string(*r.updates);
    out += ',';
    if (r.hhat_distance && !r.failed) out += format_double(*r.hhat_distance);
    out += ',';
    if (r.wall_time_s) out += format_double(*r.wall_time_s);
    out += ',';
    out += r.failed ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "equalizer,channel,snr_db,mean_ser,median_ser,trials,failures\n";
  for (const auto& s : rows) {
    out += s.equalizer;
    out += ',';
    out += s.channel;
    out += ',';
    out += format_double(s.snr_db);
    out += ',';
    const bool any = s.failures < s.trials;
    if (any) out += format_double(s.mean_ser);
    out += ',';
    if (any) out += format_double(s.median_ser);
    out += ',';
    out += std::to_string(s.trials);
    out += ',';
    out += std::to_string(s.failures);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

}  // namespace vaeq
