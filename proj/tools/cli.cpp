#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "nlcs/config.hpp"
#include "nlcs/dictionaries.hpp"
#include "nlcs/error.hpp"
#include "nlcs/image_io.hpp"
#include "nlcs/metrics.hpp"
#include "nlcs/parallel.hpp"
#include "nlcs/rng.hpp"
#include "nlcs/sampling.hpp"
#include "nlcs/solver.hpp"

namespace nlcs::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kRegNames{"gsr", "gsrc", "hsse", "nlr", "rrc", "lrgsc", "trunc"};

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config file entries, then --set key=value overrides on top.
ConfigOverrides collect_entries(const std::string& config_path, const std::vector<std::string>& sets) {
  ConfigOverrides entries;
  if (!config_path.empty()) entries = parse_config_entries(read_text(config_path));
  std::string joined;
  for (const auto& s : sets) {
    if (s.find('=') == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    joined += s + "\n";
  }
  for (auto& [k, v] : parse_config_entries(joined)) entries[k] = v;
  return entries;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || (ext == ".png" && png_supported())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no images found in " + dir.string());
  return out;
}

std::vector<double> parse_rates(const std::vector<std::string>& items) {
  std::vector<double> rates;
  for (const auto& s : items) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("bad rate '" + s + "'");
    rates.push_back(v);
  }
  return rates;
}

void print_config(std::ostream& out, const SolverConfig& cfg) {
  out << "# resolved config\n" << to_text(cfg);
}

struct SampleArgs {
  std::string in, out;
  double rate = 0.1;
  int block = 32;
  std::uint64_t seed = 0;
  bool ortho = false;
  double noise = 0.0;
};

int do_sample(const SampleArgs& a, std::ostream& out) {
  SolverConfig cfg;
  cfg.block_size = a.block;
  cfg.sampling_rate = a.rate;
  cfg.seed = a.seed;
  cfg.ortho = a.ortho;
  cfg.noise_sigma = a.noise;
  cfg.validate();
  print_config(out, cfg);

  const Image img = read_image(a.in);
  const BlockMeasurementOperator op(a.block, a.rate, a.seed, a.ortho);
  MeasurementSet ms = sample(img, op);
  if (a.noise > 0.0) add_measurement_noise(ms, a.noise, Rng(a.seed).substream(2));
  write_measurements(a.out, ms);
  out << "wrote " << ms.values.size() << " measurements (" << op.rows_per_block() << " per block, "
      << ms.block_count() << " blocks) to " << a.out << "\n";
  return kExitOk;
}

struct ReconstructArgs {
  std::string meas, config, reg, gmm, truth, out, trace;
  std::vector<std::string> sets;
  bool ortho = false;
  bool quiet = false;
  int threads = 0;
};

int do_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  const MeasurementSet ms = read_measurements(a.meas);
  std::optional<Regularizer> reg;
  if (!a.reg.empty()) reg = parse_regularizer(a.reg);
  SolverConfig cfg = resolve_config(collect_entries(a.config, a.sets), reg);
  cfg.block_size = ms.block_size;
  cfg.sampling_rate = ms.rate;
  cfg.seed = ms.seed;
  if (a.ortho) cfg.ortho = true;
  print_config(out, cfg);
  cfg.validate();

  std::optional<ExternalGMM> gmm;
  if (!a.gmm.empty()) gmm = read_gmm(a.gmm);
  std::optional<Image> truth;
  if (!a.truth.empty()) truth = read_image(a.truth);

  const BlockMeasurementOperator op(ms.block_size, ms.rate, ms.seed, cfg.ortho);
  SolverOptions options;
  options.gmm = gmm ? &*gmm : nullptr;
  options.ground_truth = truth ? &*truth : nullptr;
  options.threads = a.threads;
  if (!a.quiet) {
    options.on_iteration = [&out](const TraceRow& row) {
      out << "iter " << row.iter << " data_fidelity " << format_double(row.data_fidelity)
          << " reg " << format_double(row.reg_surrogate);
      if (row.psnr) out << " psnr " << format_double(*row.psnr);
      out << "\n";
    };
  }

  const auto start = std::chrono::steady_clock::now();
  const Reconstruction rec = reconstruct(ms, op, cfg, std::move(options));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_image(a.out, rec.image);
  if (!a.trace.empty()) {
    std::ofstream t(a.trace);
    if (!t) throw IoError("cannot create " + a.trace);
    write_trace_csv(t, rec.trace);
  }
  out << "iterations " << rec.trace.size() << " runtime_s " << format_double(secs) << "\n";
  if (truth) {
    const Psnr p = psnr(rec.image, *truth);
    out << "psnr " << format_double(p.db) << (p.identical ? " (identical, capped)" : "") << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  std::string images, out, config, gmm;
  std::vector<std::string> rates{"0.1", "0.2", "0.3"};
  std::vector<std::string> regs{"gsr", "gsrc", "nlr", "rrc", "lrgsc"};
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
};

int do_bench(const BenchArgs& a, std::ostream& out) {
  const auto paths = list_images(a.images);
  const auto rates = parse_rates(a.rates);
  const ConfigOverrides entries = collect_entries(a.config, a.sets);

  std::map<std::string, SolverConfig> base;
  for (const auto& name : a.regs) {
    SolverConfig cfg = resolve_config(entries, parse_regularizer(name));
    cfg.seed = a.seed;
    cfg.validate();
    out << "# regularizer " << name << "\n";
    print_config(out, cfg);
    base.emplace(name, cfg);
  }

  std::optional<ExternalGMM> gmm;
  if (!a.gmm.empty()) gmm = read_gmm(a.gmm);

  std::vector<Image> images;
  for (const auto& p : paths) images.push_back(read_image(p));

  struct Cell {
    std::size_t image;
    double rate;
    std::string reg;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (double r : rates) {
      for (const auto& reg : a.regs) cells.push_back({i, r, reg});
    }
  }

  const int threads = a.threads > 0 ? a.threads : default_thread_count();
  const int outer = std::min<int>(threads, static_cast<int>(cells.size()));
  const int inner = std::max(1, threads / std::max(outer, 1));

  std::vector<EvalResult> results(cells.size());
  parallel_for(cells.size(), outer, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const std::string name = paths[cell.image].filename().string();
    SolverConfig cfg = base.at(cell.reg);
    cfg.sampling_rate = cell.rate;
    cfg.seed = cell_seed(a.seed, name, cell.rate, cell.reg);

    const BlockMeasurementOperator op(cfg.block_size, cfg.sampling_rate, cfg.seed, cfg.ortho);
    MeasurementSet ms = sample(images[cell.image], op);
    if (cfg.noise_sigma > 0.0) add_measurement_noise(ms, cfg.noise_sigma, Rng(cfg.seed).substream(2));

    SolverOptions options;
    options.gmm = gmm ? &*gmm : nullptr;
    options.threads = inner;
    const auto start = std::chrono::steady_clock::now();
    const Reconstruction rec = reconstruct(ms, op, cfg, std::move(options));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    results[c] = {name, cell.reg, cell.rate, psnr(rec.image, images[cell.image]),
                  ssim(rec.image, images[cell.image]), secs};
  });

  std::ofstream csv(a.out);
  if (!csv) throw IoError("cannot create " + a.out);
  write_results_csv(csv, results);
  for (const auto& r : results) {
    out << r.image << " " << r.regularizer << " rate " << format_double(r.rate) << " psnr "
        << format_double(r.psnr.db) << " ssim " << format_double(r.ssim) << "\n";
  }
  out << "wrote " << results.size() << " rows to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string corpus, out;
  int components = 32;
  int em_iters = 30;
  int patch_side = 8;
  int group_size = 60;
  int search_window = 40;
  std::size_t max_patches = 200000;
  std::uint64_t seed = 0;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  out << "# resolved config\ncomponents = " << a.components << "\nem_iters = " << a.em_iters
      << "\npatch_side = " << a.patch_side << "\ngroup_size = " << a.group_size
      << "\nsearch_window = " << a.search_window << "\nmax_patches = " << a.max_patches
      << "\nseed = " << a.seed << "\n";
  std::vector<Image> images;
  for (const auto& p : list_images(a.corpus)) images.push_back(read_image(p));

  Rng rng(a.seed);
  Rng collect_rng = rng.substream(1);
  Rng train_rng = rng.substream(2);
  const auto groups = collect_training_groups(images, a.patch_side, a.group_size, a.search_window,
                                              a.max_patches, collect_rng);
  std::size_t patches = 0;
  for (const auto& g : groups) patches += static_cast<std::size_t>(g.cols());
  out << "training on " << groups.size() << " groups (" << patches << " patches)\n";

  GmmTrainingReport report;
  const ExternalGMM gmm = train_gmm(groups, {a.components, a.em_iters, 3}, train_rng, &report);
  for (std::size_t i = 0; i < report.log_likelihood.size(); ++i) {
    out << "em " << i + 1 << " log_likelihood " << format_double(report.log_likelihood[i]) << "\n";
  }
  out << "reseeds " << report.reseeds << "\n";
  write_gmm(a.out, gmm);
  out << "wrote " << gmm.size() << " components to " << a.out << "\n";
  return kExitOk;
}

int do_eval(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const Image a = read_image(a_path);
  const Image b = read_image(b_path);
  const Psnr p = psnr(a, b);
  out << "psnr_db " << format_double(p.db) << "\n";
  out << "identical " << (p.identical ? "true" : "false") << "\n";
  out << "ssim " << format_double(ssim(a, b)) << "\n";
  return kExitOk;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t seed, const std::string& image, double rate,
                        const std::string& reg) {
  const std::string key = image + "|" + format_double(rate) + "|" + reg;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return seed ^ h;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal structured-sparsity compressive sensing reconstruction", "nlcs"};
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Block-sample an image into a measurement file");
  sample_cmd->add_option("--in", sa.in, "Input image (.pgm)")->required();
  sample_cmd->add_option("--rate", sa.rate, "Sampling rate in (0,1]")->check(CLI::Range(0.0, 1.0));
  sample_cmd->add_option("--block", sa.block, "Block size")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sa.seed, "Operator seed");
  sample_cmd->add_flag("--ortho", sa.ortho, "Orthonormalize the rows of phi");
  sample_cmd->add_option("--noise", sa.noise, "Gaussian measurement noise sigma")->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--out", sa.out, "Output measurement file")->required();

  ReconstructArgs ra;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct an image from measurements");
  rec_cmd->add_option("--meas", ra.meas, "Measurement file")->required();
  rec_cmd->add_option("--config", ra.config, "Config file (key = value)");
  rec_cmd->add_option("--reg", ra.reg, "Regularizer")->check(CLI::IsMember(kRegNames));
  rec_cmd->add_option("--gmm", ra.gmm, "External GMM model (hsse)");
  rec_cmd->add_option("--truth", ra.truth, "Ground truth image for PSNR tracing");
  rec_cmd->add_option("--out", ra.out, "Output image")->required();
  rec_cmd->add_option("--trace", ra.trace, "Per-iteration trace CSV");
  rec_cmd->add_option("--set", ra.sets, "Config override key=value (repeatable)");
  rec_cmd->add_flag("--ortho", ra.ortho, "Measurements were taken with --ortho");
  rec_cmd->add_flag("--quiet", ra.quiet, "No per-iteration log lines");
  rec_cmd->add_option("--threads", ra.threads, "Worker threads (0 = auto)")->check(CLI::NonNegativeNumber);

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Sweep images x rates x regularizers");
  bench_cmd->add_option("--images", ba.images, "Directory of test images")->required();
  bench_cmd->add_option("--rates", ba.rates, "Comma-separated rates")->delimiter(',');
  bench_cmd->add_option("--regs", ba.regs, "Comma-separated regularizers")
      ->delimiter(',')
      ->check(CLI::IsMember(kRegNames));
  bench_cmd->add_option("--out", ba.out, "Results CSV")->required();
  bench_cmd->add_option("--config", ba.config, "Config file applied to every cell");
  bench_cmd->add_option("--set", ba.sets, "Config override key=value (repeatable)");
  bench_cmd->add_option("--gmm", ba.gmm, "External GMM model (hsse)");
  bench_cmd->add_option("--seed", ba.seed, "Base seed");
  bench_cmd->add_option("--threads", ba.threads, "Worker threads (0 = auto)")->check(CLI::NonNegativeNumber);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train-gmm", "Train the external patch-group GMM");
  train_cmd->add_option("--corpus", ta.corpus, "Directory of training images")->required();
  train_cmd->add_option("--components", ta.components, "Mixture components")->check(CLI::PositiveNumber);
  train_cmd->add_option("--em-iters", ta.em_iters, "EM iterations")->check(CLI::PositiveNumber);
  train_cmd->add_option("--patch-side", ta.patch_side, "Patch side")->check(CLI::PositiveNumber);
  train_cmd->add_option("--group-size", ta.group_size, "Patches per group")->check(CLI::PositiveNumber);
  train_cmd->add_option("--search-window", ta.search_window, "Block matching window")->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-patches", ta.max_patches, "Training patch budget")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", ta.seed, "Sampling and init seed");
  train_cmd->add_option("--out", ta.out, "Output model file")->required();

  std::string eval_a, eval_b;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR and SSIM between two images");
  eval_cmd->add_option("--a", eval_a, "First image")->required();
  eval_cmd->add_option("--b", eval_b, "Second image")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*sample_cmd) return do_sample(sa, out);
    if (*rec_cmd) return do_reconstruct(ra, out);
    if (*bench_cmd) return do_bench(ba, out);
    if (*train_cmd) return do_train(ta, out);
    if (*eval_cmd) return do_eval(eval_a, eval_b, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace nlcs::cli
