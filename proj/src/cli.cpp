#include "fjd/cli.hpp"

#include "fjd/embedders.hpp"
#include "fjd/error.hpp"
#include "fjd/harness.hpp"
#include "fjd/io.hpp"
#include "fjd/joint.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fjd {

namespace {

namespace fs = std::filesystem;

struct AlphaChoice {
  AlphaMode mode = AlphaMode::automatic;
  double value = 1.0;
};

AlphaChoice parse_alpha(const std::string& text) {
  if (text == "auto") {
    return {};
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v) || v < 0.0) {
    throw UsageError("--alpha must be 'auto' or a finite non-negative number, got '" + text + "'");
  }
  return {AlphaMode::fixed, v};
}

std::vector<Shape> parse_shapes(const std::vector<std::string>& names) {
  std::vector<Shape> out;
  for (const auto& n : names) {
    bool found = false;
    for (auto s : {Shape::square, Shape::ellipse, Shape::heart}) {
      if (n == to_string(s)) {
        out.push_back(s);
        found = true;
      }
    }
    if (!found) throw UsageError("unknown shape '" + n + "'");
  }
  return out;
}

// Writes `text` to `path`, or to `out` when no path is given.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

// CSV has no room for the reporting block, so it travels next to the table.
void emit_table(const ResultTable& table, ResultFormat format, const std::string& path, std::ostream& out,
                std::ostream& err) {
  if (format == ResultFormat::json) {
    emit(results_json(table), path, out);
    return;
  }
  emit(results_csv(table), path, out);
  if (path.empty()) {
    err << "metadata: " << metadata_json(table.metadata);
  } else {
    write_file(path + ".meta.json", metadata_json(table.metadata));
  }
}

struct PairedFiles {
  std::string ref_img, ref_cond, gen_img, gen_cond;

  void add_to(CLI::App* cmd, bool with_generated) {
    cmd->add_option("--ref-img", ref_img, "reference image embeddings (FJDE)")->required();
    cmd->add_option("--ref-cond", ref_cond, "reference conditioning embeddings (FJDE)")->required();
    if (with_generated) {
      cmd->add_option("--gen-img", gen_img, "generated image embeddings (FJDE)")->required();
      cmd->add_option("--gen-cond", gen_cond, "generated conditioning embeddings (FJDE)")->required();
    }
  }
};

PairedEmbeddings load_pair(const std::string& img, const std::string& cond) {
  PairedEmbeddings p{read_embeddings(img), read_embeddings(cond)};
  p.validate();
  return p;
}

struct ReportIds {
  std::string image_id = "unspecified";
  std::string cond_id = "unspecified";
  std::string reference_id;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--image-embedder-id", image_id, "identifier of the image embedder");
    cmd->add_option("--cond-embedder-id", cond_id, "identifier of the conditioning embedder");
    cmd->add_option("--reference-id", reference_id, "identifier of the reference split (default: file path)");
    cmd->add_option("--seed", seed, "seed recorded in the report");
  }
};

struct SynthCommon {
  std::string cond_type = "class";
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::string> shapes = {"square", "ellipse", "heart"};

  void add_to(CLI::App* cmd, bool with_cond_type = true) {
    if (with_cond_type) {
      cmd->add_option("--cond-type", cond_type, "class|bbox|mask|attributes")->capture_default_str();
    }
    cmd->add_option("--n", n, "number of samples")->capture_default_str();
    cmd->add_option("--seed", seed, "generator seed")->capture_default_str();
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--shapes", shapes, "shapes to draw from")->delimiter(',');
  }

  DatasetConfig config() const {
    if (n < 1) throw UsageError("--n must be at least 1");
    DatasetConfig c;
    c.n = n;
    c.cond_type = parse_cond_type(cond_type);
    c.seed = seed;
    c.shapes = parse_shapes(shapes);
    return c;
  }
};

void write_dataset_files(const fs::path& dir, const std::string& prefix, const PairedDataset& ds,
                         DatasetManifest& manifest) {
  const auto images = prefix + "_images.fjde";
  const auto conds = prefix + "_conds.fjde";
  const auto img_bytes = encode_embeddings(dataset_images(ds));
  const auto cond_bytes = encode_embeddings(dataset_conditionings(ds));
  write_file((dir / images).string(), img_bytes);
  write_file((dir / conds).string(), cond_bytes);
  manifest.checksums[images] = sha256_hex(img_bytes);
  manifest.checksums[conds] = sha256_hex(cond_bytes);
}

void write_synth_outputs(const std::string& out_dir, DatasetManifest manifest, std::ostream& out) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw DataError("cannot create output directory '" + out_dir + "': " + ec.message());
  }
  const auto data = regenerate(manifest);
  write_dataset_files(dir, "ref", data.reference, manifest);
  if (data.generated) {
    write_dataset_files(dir, "gen", *data.generated, manifest);
  }
  manifest.embedder_ids = {"pixels:64x64x1", std::string("record:") + to_string(manifest.generator.cond_type)};
  const auto path = (dir / "manifest.json").string();
  write_manifest(manifest, path);
  out << path << "\n";
}

void verify_manifest(const std::string& path, std::ostream& out) {
  const auto manifest = read_manifest(path);
  DatasetManifest regenerated = manifest;
  regenerated.checksums.clear();
  const auto data = regenerate(manifest);
  const auto check = [&](const std::string& prefix, const PairedDataset& ds) {
    const std::pair<std::string, EmbeddingSet> files[] = {{prefix + "_images.fjde", dataset_images(ds)},
                                                          {prefix + "_conds.fjde", dataset_conditionings(ds)}};
    for (const auto& [name, set] : files) {
      const auto it = manifest.checksums.find(name);
      if (it == manifest.checksums.end()) {
        throw DataError("manifest has no checksum for " + name);
      }
      if (sha256_hex(encode_embeddings(set)) != it->second) {
        throw DataError("checksum mismatch for " + name);
      }
    }
  };
  check("ref", data.reference);
  if (data.generated) check("gen", *data.generated);
  out << "ok: " << manifest.checksums.size() << " files reproduce bit-exactly\n";
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    app_.require_subcommand(1);
    add_compute();
    add_calibrate();
    add_sweep_alpha();
    add_synth();
    add_demo();
    add_embed();
    add_experiment();
  }

  int run(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app_.exit(e, out_, err_);
      return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }
    action_();
    return 0;
  }

 private:
  void add_compute() {
    auto* cmd = app_.add_subcommand("compute", "FID and FJD between paired embedding files");
    auto files = std::make_shared<PairedFiles>();
    auto ids = std::make_shared<ReportIds>();
    auto alpha = std::make_shared<std::string>("auto");
    auto format = std::make_shared<std::string>("json");
    auto output = std::make_shared<std::string>();
    auto threads = std::make_shared<unsigned>(1);
    files->add_to(cmd, true);
    ids->add_to(cmd);
    cmd->add_option("--alpha", *alpha, "auto or a fixed non-negative value")->capture_default_str();
    cmd->add_option("--out", *format, "json|csv")->capture_default_str();
    cmd->add_option("--output", *output, "output file (default: stdout)");
    cmd->add_option("--threads", *threads, "accumulation threads")->capture_default_str();
    cmd->callback([=, this] {
      action_ = [=, this] {
        const auto a = parse_alpha(*alpha);
        const auto fmt = parse_result_format(*format);
        const auto ref = load_pair(files->ref_img, files->ref_cond);
        const auto gen = load_pair(files->gen_img, files->gen_cond);
        JointConfig config{a.value, a.mode, ids->image_id, ids->cond_id,
                           ids->reference_id.empty() ? files->ref_img : ids->reference_id};
        const EstimateOptions opts{std::max(1u, *threads)};
        auto score = compute_fjd(ref, gen, config, opts);
        score.metadata.seed = ids->seed;
        const auto fid = compute_fid(ref.image, gen.image, opts);
        if (fmt == ResultFormat::json) {
          emit(score_json(fid, score), *output, out_);
        } else {
          ResultTable table;
          table.metadata = score.metadata;
          table.rows.push_back({score.metadata.alpha, fid.value, score.result.value, score.metadata.alpha,
                                fid.clamped_eigenvalues + score.result.clamped_eigenvalues});
          emit_table(table, fmt, *output, out_, err_);
        }
      };
    });
  }

  void add_calibrate() {
    auto* cmd = app_.add_subcommand("calibrate-alpha", "alpha from the reference embedding norms");
    auto files = std::make_shared<PairedFiles>();
    files->add_to(cmd, false);
    cmd->callback([=, this] {
      action_ = [=, this] {
        const double alpha = calibrate_alpha(load_pair(files->ref_img, files->ref_cond));
        char full[64];
        std::snprintf(full, sizeof full, "%.17g", alpha);
        out_ << "{\"alpha\": " << full << ", \"alpha_reported\": \"" << format_alpha(alpha) << "\"}\n";
      };
    });
  }

  void add_sweep_alpha() {
    auto* cmd = app_.add_subcommand("sweep-alpha", "FJD over a list of alpha values");
    auto files = std::make_shared<PairedFiles>();
    auto ids = std::make_shared<ReportIds>();
    auto alphas = std::make_shared<std::vector<double>>();
    auto format = std::make_shared<std::string>("csv");
    auto output = std::make_shared<std::string>();
    files->add_to(cmd, true);
    ids->add_to(cmd);
    cmd->add_option("--alphas", *alphas, "comma-separated alpha values")->delimiter(',')->required();
    cmd->add_option("--out", *format, "json|csv")->capture_default_str();
    cmd->add_option("--output", *output, "output file (default: stdout)");
    cmd->callback([=, this] {
      action_ = [=, this] {
        const auto fmt = parse_result_format(*format);
        const auto ref = load_pair(files->ref_img, files->ref_cond);
        const auto gen = load_pair(files->gen_img, files->gen_cond);
        const auto points = sweep_alpha(ref, gen, *alphas);
        const auto fid = compute_fid(ref.image, gen.image);

        ResultTable table;
        table.config.kind = ExperimentKind::alpha_sweep;
        table.config.sweep = *alphas;
        table.config.n_samples = ref.rows();
        table.config.joint.alpha_mode = AlphaMode::fixed;
        table.config.joint.image_embedder_id = ids->image_id;
        table.config.joint.cond_embedder_id = ids->cond_id;
        table.config.joint.reference_id = ids->reference_id.empty() ? files->ref_img : ids->reference_id;
        table.metadata = {alphas->back(), AlphaMode::fixed, ids->image_id, ids->cond_id,
                          table.config.joint.reference_id, ids->seed};
        for (const auto& p : points) {
          table.rows.push_back({p.alpha, fid.value, p.result.value, p.alpha,
                                fid.clamped_eigenvalues + p.result.clamped_eigenvalues});
        }
        emit_table(table, fmt, *output, out_, err_);
      };
    });
  }

  void add_synth() {
    auto* synth = app_.add_subcommand("synth", "generate synthetic sprite datasets");
    synth->require_subcommand(1);

    {
      auto* cmd = synth->add_subcommand("make", "reference dataset");
      auto common = std::make_shared<SynthCommon>();
      common->add_to(cmd);
      cmd->callback([=, this] {
        action_ = [=, this] {
          DatasetManifest m;
          m.generator = common->config();
          write_synth_outputs(common->out_dir, m, out_);
        };
      });
    }
    {
      auto* cmd = synth->add_subcommand("noise", "reference plus a pixel-noise copy");
      auto common = std::make_shared<SynthCommon>();
      auto sigma = std::make_shared<double>(0.1);
      auto noise_seed = std::make_shared<std::optional<std::uint64_t>>();
      common->add_to(cmd);
      cmd->add_option("--sigma", *sigma, "noise standard deviation")->capture_default_str();
      cmd->add_option("--noise-seed", *noise_seed, "noise seed (default: derived from --seed)");
      cmd->callback([=, this] {
        action_ = [=, this] {
          DatasetManifest m;
          m.generator = common->config();
          m.perturbations.push_back({"noise", {{"sigma", *sigma}}, "", noise_seed->value_or(derive_seed(common->seed, 1))});
          write_synth_outputs(common->out_dir, m, out_);
        };
      });
    }
    {
      auto* cmd = synth->add_subcommand("consistency", "reference plus a conditioning-swap copy");
      auto common = std::make_shared<SynthCommon>();
      auto attribute = std::make_shared<std::string>("x_pos");
      auto offset = std::make_shared<double>(3.0);
      auto fraction = std::make_shared<double>(0.3);
      common->add_to(cmd);
      cmd->add_option("--attribute", *attribute, "scale|orientation|x_pos|y_pos")->capture_default_str();
      cmd->add_option("--offset", *offset, "attribute offset between swapped rows")->capture_default_str();
      cmd->add_option("--fraction", *fraction, "fraction of rows swapped")->capture_default_str();
      cmd->callback([=, this] {
        action_ = [=, this] {
          DatasetManifest m;
          m.generator = common->config();
          // Rows come in pairs one offset apart so that partners always exist.
          m.generator.grouping = Grouping{parse_factor(*attribute), *offset, 2};
          m.perturbations.push_back({"swap", {{"offset", *offset}, {"fraction", *fraction}}, *attribute, 0});
          write_synth_outputs(common->out_dir, m, out_);
        };
      });
    }
    {
      auto* cmd = synth->add_subcommand("diversity", "reference plus a texture-stratified copy");
      auto common = std::make_shared<SynthCommon>();
      auto stratify = std::make_shared<std::string>("shape");
      auto score = std::make_shared<double>(0.5);
      auto textures = std::make_shared<int>(kNumTextures);
      auto div_seed = std::make_shared<std::optional<std::uint64_t>>();
      common->add_to(cmd);
      cmd->add_option("--stratify-by", *stratify, "shape|scale|orientation|x_pos|y_pos")->capture_default_str();
      cmd->add_option("--score", *score, "diversity score in [0, 1]")->capture_default_str();
      cmd->add_option("--texture-count", *textures, "textures used by the assignment")->capture_default_str();
      cmd->add_option("--diversity-seed", *div_seed, "seed of the texture re-draw (default: derived)");
      cmd->callback([=, this] {
        action_ = [=, this] {
          DatasetManifest m;
          m.generator = common->config();
          m.perturbations.push_back({"diversity",
                                     {{"score", *score}, {"texture_count", static_cast<double>(*textures)}},
                                     *stratify,
                                     div_seed->value_or(derive_seed(common->seed, 2))});
          write_synth_outputs(common->out_dir, m, out_);
        };
      });
    }
    {
      auto* cmd = synth->add_subcommand("hamming", "attribute-vector reference plus a permuted copy");
      auto common = std::make_shared<SynthCommon>();
      auto target = std::make_shared<double>(4.0);
      auto ham_seed = std::make_shared<std::optional<std::uint64_t>>();
      common->add_to(cmd, false);
      cmd->add_option("--target", *target, "target mean Hamming distance")->capture_default_str();
      cmd->add_option("--hamming-seed", *ham_seed, "permutation seed (default: derived)");
      cmd->callback([=, this] {
        action_ = [=, this] {
          common->cond_type = "attributes";
          DatasetManifest m;
          m.generator = common->config();
          m.perturbations.push_back({"hamming", {{"target", *target}}, "", ham_seed->value_or(derive_seed(common->seed, 3))});
          write_synth_outputs(common->out_dir, m, out_);
        };
      });
    }
    {
      auto* cmd = synth->add_subcommand("verify", "regenerate from a manifest and compare checksums");
      auto path = std::make_shared<std::string>();
      cmd->add_option("--manifest", *path, "manifest.json written by synth")->required();
      cmd->callback([=, this] {
        action_ = [=, this] { verify_manifest(*path, out_); };
      });
    }
  }

  void add_demo() {
    auto* demo = app_.add_subcommand("demo", "built-in demonstrations");
    demo->require_subcommand(1);
    auto* cmd = demo->add_subcommand("gaussian", "two joint Gaussians with equal image marginals");
    auto cfg = std::make_shared<ExperimentConfig>();
    cfg->kind = ExperimentKind::gaussian_demo;
    auto format = std::make_shared<std::string>("json");
    auto output = std::make_shared<std::string>();
    cmd->add_flag("--exact", cfg->exact, "use the analytic parameters");
    cmd->add_option("--n", cfg->n_samples, "samples per distribution")->capture_default_str();
    cmd->add_option("--seed", cfg->seed, "sampling seed")->capture_default_str();
    cmd->add_option("--alphas", cfg->sweep, "alpha values (default 1)")->delimiter(',');
    cmd->add_option("--out", *format, "json|csv")->capture_default_str();
    cmd->add_option("--output", *output, "output file (default: stdout)");
    cmd->callback([=, this] {
      action_ = [=, this] {
        const auto fmt = parse_result_format(*format);
        emit_table(run_experiment(*cfg), fmt, *output, out_, err_);
      };
    });
  }

  void add_embed() {
    auto* embed = app_.add_subcommand("embed", "apply a desk-scale embedder to an FJDE file");
    embed->require_subcommand(1);

    const auto add_io = [](CLI::App* cmd, std::string& in, std::string& out) {
      cmd->add_option("--input", in, "input records (FJDE)")->required();
      cmd->add_option("--output", out, "output embeddings (FJDE)")->required();
    };
    const auto run_embedder = [this](const Embedder& e, const std::string& in, const std::string& out) {
      auto set = read_embeddings(in);
      write_embeddings(e.encode_rows(set.data), out);
      out_ << e.id() << "\n";
    };

    for (const char* name : {"onehot", "nhot"}) {
      auto* cmd = embed->add_subcommand(name, std::string(name) + " label encoding");
      auto in = std::make_shared<std::string>();
      auto out = std::make_shared<std::string>();
      auto classes = std::make_shared<int>(0);
      add_io(cmd, *in, *out);
      cmd->add_option("--classes", *classes, "number of classes")->required();
      const bool nhot = std::string(name) == "nhot";
      cmd->callback([=, this] {
        action_ = [=, this] {
          if (!nhot) {
            run_embedder(Embedder::make_one_hot(*classes), *in, *out);
            return;
          }
          // Label lists are padded with negative values.
          const auto e = Embedder::make_n_hot(*classes);
          const auto set = read_embeddings(*in);
          RowMatrix rows(set.data.rows(), *classes);
          for (Eigen::Index r = 0; r < set.data.rows(); ++r) {
            std::vector<double> labels;
            for (Eigen::Index c = 0; c < set.data.cols(); ++c) {
              if (set.data(r, c) >= 0.0) labels.push_back(set.data(r, c));
            }
            rows.row(r) = e.encode(labels).transpose();
          }
          write_embeddings(EmbeddingSet(std::move(rows), e.id()), *out);
          out_ << e.id() << "\n";
        };
      });
    }
    {
      auto* cmd = embed->add_subcommand("pixels", "flattened pixels in [0, 1]");
      auto in = std::make_shared<std::string>();
      auto out = std::make_shared<std::string>();
      auto shape = std::make_shared<std::array<int, 3>>(std::array<int, 3>{kCanvasSize, kCanvasSize, 1});
      add_io(cmd, *in, *out);
      cmd->add_option("--height", (*shape)[0], "image height")->capture_default_str();
      cmd->add_option("--width", (*shape)[1], "image width")->capture_default_str();
      cmd->add_option("--channels", (*shape)[2], "image channels")->capture_default_str();
      cmd->callback([=, this] {
        action_ = [=, this] { run_embedder(Embedder::make_pixels((*shape)[0], (*shape)[1], (*shape)[2]), *in, *out); };
      });
    }
    {
      auto* cmd = embed->add_subcommand("pca", "linear PCA fitted on a reference file");
      auto in = std::make_shared<std::string>();
      auto out = std::make_shared<std::string>();
      auto fit = std::make_shared<std::string>();
      auto dim = std::make_shared<int>(64);
      auto seed = std::make_shared<std::uint64_t>(PcaOptions{}.seed);
      add_io(cmd, *in, *out);
      cmd->add_option("--fit", *fit, "training file (default: the input)");
      cmd->add_option("--dim", *dim, "latent dimension")->capture_default_str();
      cmd->add_option("--seed", *seed, "randomized range-finder seed");
      cmd->callback([=, this] {
        action_ = [=, this] {
          const auto train = read_embeddings(fit->empty() ? *in : *fit);
          PcaOptions opts;
          opts.seed = *seed;
          auto model = std::make_shared<PcaModel>(pca_fit(train, *dim, opts));
          const auto e = Embedder::make_pca(model, "pca:" + std::to_string(*dim) + ":" + sha256_file(train.id).substr(0, 12));
          run_embedder(e, *in, *out);
        };
      });
    }
  }

  void add_experiment() {
    auto* cmd = app_.add_subcommand("experiment", "run a synthetic sweep end to end");
    auto cfg = std::make_shared<ExperimentConfig>();
    auto kind = std::make_shared<std::string>("noise");
    auto cond = std::make_shared<std::string>("class");
    auto attribute = std::make_shared<std::string>();
    auto alpha = std::make_shared<std::string>("auto");
    auto shapes = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"square", "ellipse", "heart"});
    auto format = std::make_shared<std::string>("csv");
    auto output = std::make_shared<std::string>();
    auto fast = std::make_shared<bool>(false);
    auto floor = std::make_shared<bool>(false);
    cmd->add_option("--kind", *kind, "noise|consistency|diversity|alpha_sweep|gaussian_demo|hamming")
        ->capture_default_str();
    cmd->add_option("--cond-type", *cond, "class|bbox|mask|attributes")->capture_default_str();
    cmd->add_option("--sweep", cfg->sweep, "sweep values (default per kind)")->delimiter(',');
    cmd->add_option("--n", cfg->n_samples, "samples per dataset")->capture_default_str();
    cmd->add_option("--seed", cfg->seed, "experiment seed")->capture_default_str();
    cmd->add_option("--attribute", *attribute, "swap or stratification factor");
    cmd->add_option("--alpha", *alpha, "auto or a fixed non-negative value")->capture_default_str();
    cmd->add_option("--shapes", *shapes, "shapes to draw from")->delimiter(',');
    cmd->add_option("--swap-fraction", cfg->swap_fraction, "fraction of swapped rows")->capture_default_str();
    cmd->add_option("--texture-count", cfg->texture_count, "textures used by diversity runs")->capture_default_str();
    cmd->add_option("--threads", cfg->threads, "accumulation threads")->capture_default_str();
    cmd->add_flag("--exact", cfg->exact, "gaussian_demo with analytic parameters");
    cmd->add_flag("--fast", *fast, "2000 samples instead of the configured count");
    cmd->add_flag("--control-floor", *floor, "also report the two-sample control floor on stderr");
    cmd->add_option("--out", *format, "json|csv")->capture_default_str();
    cmd->add_option("--output", *output, "output file (default: stdout)");
    cmd->callback([=, this] {
      action_ = [=, this] {
        ExperimentConfig c = *cfg;
        c.kind = parse_experiment_kind(*kind);
        c.cond_type = c.kind == ExperimentKind::hamming ? CondType::attributes : parse_cond_type(*cond);
        if (!attribute->empty()) {
          c.attribute = parse_factor(*attribute);
        } else if (c.kind == ExperimentKind::diversity) {
          c.attribute = Factor::shape;
        }
        const auto a = parse_alpha(*alpha);
        c.joint.alpha_mode = a.mode;
        c.joint.alpha = a.value;
        c.shapes = parse_shapes(*shapes);
        c.threads = std::max(1u, c.threads);
        if (*fast) c.n_samples = 2000;
        const auto fmt = parse_result_format(*format);

        // Rows finished before a failure are still written out.
        ResultTable partial;
        partial.config = c;
        try {
          const auto table = run_experiment(c, [&](const ResultRow& r) { partial.rows.push_back(r); });
          emit_table(table, fmt, *output, out_, err_);
        } catch (...) {
          if (!partial.rows.empty()) {
            err_ << "experiment aborted after " << partial.rows.size() << " rows; writing partial results\n";
            emit_table(partial, fmt, *output, out_, err_);
          }
          throw;
        }
        if (*floor) {
          const auto f = control_floor(c);
          err_ << "control floor: fid " << f.fid << ", fjd " << f.fjd << "\n";
        }
      };
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"Frechet Joint Distance toolkit", "fjd"};
  std::function<void()> action_;
};

}  // namespace

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return static_cast<int>(err->kind());
  }
  return static_cast<int>(ErrorKind::data);
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Cli cli(out, err);
    return cli.run(args);
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace fjd
