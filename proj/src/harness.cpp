#include "fjd/harness.hpp"

#include "fjd/embedders.hpp"
#include "fjd/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

namespace fjd {

namespace {

// Stream tags that keep the RNG of each perturbation apart from dataset rows.
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kDiversityStream = 0x6469766572ULL;
constexpr std::uint64_t kHammingStream = 0x68616d6dULL;
constexpr std::uint64_t kGeneratedStream = 0x67656eULL;
constexpr std::uint64_t kControlStream = 0x6374726cULL;
constexpr double kAlphaSweepNoise = 0.1;

RowMatrix image_rows(const std::vector<Image>& images) {
  if (images.empty()) {
    throw DataError("dataset is empty");
  }
  RowMatrix out(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(images.front().size()));
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = flatten_pixels(images[i]).transpose();
  }
  return out;
}

// Rasters of the spatial conditionings, label values kept as-is.
RowMatrix cond_raster_rows(const PairedDataset& ds) {
  RowMatrix out(static_cast<Eigen::Index>(ds.size()), kCanvasSize * kCanvasSize);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Image raster;
    if (const auto* b = std::get_if<BoxCond>(&ds.conds[i])) {
      raster = bbox_raster(b->box, b->label + 1);
    } else if (const auto* m = std::get_if<MaskCond>(&ds.conds[i])) {
      raster = m->mask;
    } else {
      throw DataError("conditioning has no raster form");
    }
    out.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXf>(raster.pixels.data(), static_cast<Eigen::Index>(raster.size()))
            .cast<double>()
            .transpose();
  }
  return out;
}

RowMatrix cond_record_rows(const PairedDataset& ds) {
  const auto width = conditioning_record(ds.conds.front()).size();
  RowMatrix out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto rec = conditioning_record(ds.conds[i]);
    out.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Vector>(rec.data(), static_cast<Eigen::Index>(rec.size())).transpose();
  }
  return out;
}

// Image and conditioning embedders, fitted once on a reference dataset.
class SpriteEmbedders {
 public:
  SpriteEmbedders(const PairedDataset& reference, const ExperimentConfig& cfg)
      : cond_type_(cfg.cond_type),
        image_(fit_pca(image_rows(reference.images), cfg.image_latent_dim, "pixel_pca:")),
        cond_(make_cond_embedder(reference, cfg)) {}

  PairedEmbeddings embed(const PairedDataset& ds) const {
    if (ds.size() == 0) {
      throw DataError("dataset is empty");
    }
    PairedEmbeddings out;
    out.image = image_.encode_rows(image_rows(ds.images));
    const bool raster = cond_type_ == CondType::bbox || cond_type_ == CondType::mask;
    out.cond = cond_.encode_rows(raster ? cond_raster_rows(ds) : cond_record_rows(ds));
    return out;
  }

  const std::string& image_id() const { return image_.id(); }
  const std::string& cond_id() const { return cond_.id(); }

 private:
  static Embedder fit_pca(const RowMatrix& rows, int latent, const std::string& prefix) {
    auto model = std::make_shared<PcaModel>(pca_fit(EmbeddingSet(rows), latent));
    return Embedder::make_pca(std::move(model), prefix + std::to_string(latent));
  }

  static Embedder make_cond_embedder(const PairedDataset& reference, const ExperimentConfig& cfg) {
    switch (cfg.cond_type) {
      case CondType::class_label:
        return Embedder::make_one_hot(kNumShapes);
      case CondType::bbox:
        return fit_pca(cond_raster_rows(reference), cfg.bbox_latent_dim, "bbox_raster_pca:");
      case CondType::mask:
        return fit_pca(cond_raster_rows(reference), cfg.mask_latent_dim, "mask_pca:");
      case CondType::attributes:
        return Embedder::make_precomputed("attribute_bits:" + std::to_string(kAttributeBits), kAttributeBits);
    }
    throw UsageError("unknown conditioning type");
  }

  CondType cond_type_;
  Embedder image_;
  Embedder cond_;
};

bool is_monotone(const std::vector<double>& v) {
  return std::is_sorted(v.begin(), v.end()) || std::is_sorted(v.rbegin(), v.rend());
}

// Offsets are whole lattice steps: 1 px, 1 degree or one scale step.
double lattice_unit(Factor f) { return f == Factor::scale ? kScaleStep : 1.0; }

long long to_units(double offset, Factor f) {
  const double units = offset / lattice_unit(f);
  const double rounded = std::round(units);
  if (std::abs(units - rounded) > 1e-9 || rounded < 0) {
    throw UsageError("swap offset " + std::to_string(offset) + " is not a whole number of lattice steps");
  }
  return static_cast<long long>(rounded);
}

// Groups large enough to contain a partner at every requested offset.
Grouping grouping_for(const ExperimentConfig& cfg, const std::vector<double>& offsets) {
  long long step = 0;
  long long largest = 0;
  for (double o : offsets) {
    const long long u = to_units(o, cfg.attribute);
    step = std::gcd(step, u);
    largest = std::max(largest, u);
  }
  Grouping g;
  g.attribute = cfg.attribute;
  if (step == 0) {
    g.step = lattice_unit(cfg.attribute);
    g.size = 1;
    return g;
  }
  g.step = static_cast<double>(step) * lattice_unit(cfg.attribute);
  if (cfg.attribute == Factor::orientation && 360 % step == 0) {
    // A full turn, so that every offset up to 180 degrees has many partners.
    g.size = static_cast<int>(360 / step);
  } else {
    g.size = static_cast<int>(largest / step + 1);
  }
  return g;
}

DatasetConfig dataset_config(const ExperimentConfig& cfg, const std::vector<double>& sweep, std::uint64_t seed) {
  DatasetConfig base;
  base.n = cfg.n_samples;
  base.cond_type = cfg.cond_type;
  base.seed = seed;
  base.shapes = cfg.shapes;
  if (cfg.kind == ExperimentKind::consistency) {
    base.grouping = grouping_for(cfg, sweep);
  }
  return base;
}

std::string reference_id(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::gaussian_demo) {
    return cfg.exact ? "gaussian_demo:exact" : "gaussian_demo:n=" + std::to_string(cfg.n_samples) +
                                                   ":seed=" + std::to_string(cfg.seed);
  }
  return std::string("synth:") + to_string(cfg.cond_type) + ":n=" + std::to_string(cfg.n_samples) +
         ":seed=" + std::to_string(cfg.seed);
}

ResultRow make_row(double value, double alpha, const FrechetResult& fid, const FrechetResult& fjd) {
  return {value, fid.value, fjd.value, alpha, fid.clamped_eigenvalues + fjd.clamped_eigenvalues};
}

GaussianStats marginal(const GaussianStats& joint, Eigen::Index begin, Eigen::Index size) {
  GaussianStats out;
  out.mean = joint.mean.segment(begin, size);
  out.cov = joint.cov.block(begin, begin, size, size);
  out.count = joint.count;
  return out;
}

PairedEmbeddings split_columns(const EmbeddingSet& joint) {
  PairedEmbeddings out;
  out.image = EmbeddingSet(joint.data.leftCols(1), joint.id);
  out.cond = EmbeddingSet(joint.data.rightCols(1), joint.id);
  return out;
}

ResultTable run_gaussian_demo(const ExperimentConfig& cfg, const std::vector<double>& sweep, const RowSink& sink) {
  ResultTable table;
  table.config = cfg;
  table.config.sweep = sweep;
  table.metadata.alpha_mode = AlphaMode::fixed;
  table.metadata.image_embedder_id = "identity:1";
  table.metadata.cond_embedder_id = "identity:1";
  table.metadata.reference_id = reference_id(cfg);
  if (!cfg.exact) {
    table.metadata.seed = cfg.seed;
  }

  GaussianStats ref_unit = demo_gaussian(1);
  GaussianStats gen_unit = demo_gaussian(2);
  EstimateOptions opts{cfg.threads};
  if (!cfg.exact) {
    // Both draws share the seed, so their identical image marginals are
    // sampled identically as well.
    const auto a = split_columns(sample_gaussian(ref_unit.mean, ref_unit.cov, cfg.n_samples, cfg.seed));
    const auto b = split_columns(sample_gaussian(gen_unit.mean, gen_unit.cov, cfg.n_samples, cfg.seed));
    ref_unit = estimate_joint_gaussian(a, 1.0, opts);
    gen_unit = estimate_joint_gaussian(b, 1.0, opts);
  }
  const auto fid = frechet_distance(marginal(ref_unit, 0, 1), marginal(gen_unit, 0, 1));
  for (double alpha : sweep) {
    const auto fjd = frechet_distance(scale_conditioning(ref_unit, 1, alpha), scale_conditioning(gen_unit, 1, alpha));
    table.rows.push_back(make_row(alpha, alpha, fid, fjd));
    if (sink) sink(table.rows.back());
  }
  table.metadata.alpha = sweep.back();
  return table;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::noise: return "noise";
    case ExperimentKind::consistency: return "consistency";
    case ExperimentKind::diversity: return "diversity";
    case ExperimentKind::alpha_sweep: return "alpha_sweep";
    case ExperimentKind::gaussian_demo: return "gaussian_demo";
    case ExperimentKind::hamming: return "hamming";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::noise, ExperimentKind::consistency, ExperimentKind::diversity,
                 ExperimentKind::alpha_sweep, ExperimentKind::gaussian_demo, ExperimentKind::hamming}) {
    if (name == to_string(k)) return k;
  }
  throw UsageError("unknown experiment kind '" + name + "'");
}

std::vector<double> default_sweep(ExperimentKind kind, Factor attribute) {
  switch (kind) {
    case ExperimentKind::noise: return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
    case ExperimentKind::consistency:
      switch (attribute) {
        case Factor::orientation: {
          std::vector<double> v;
          for (int deg = 15; deg <= 180; deg += 15) v.push_back(deg);
          return v;
        }
        case Factor::scale: return {0.1, 0.2, 0.3};
        default: return {1.0, 2.0, 3.0, 4.0};
      }
    case ExperimentKind::diversity: return {1.0, 0.75, 0.5, 0.25, 0.0};
    case ExperimentKind::alpha_sweep: return {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
    case ExperimentKind::gaussian_demo: return {1.0};
    case ExperimentKind::hamming: return {0.0, 2.0, 4.0, 8.0};
  }
  return {};
}

void validate(const ExperimentConfig& cfg) {
  if (!cfg.sweep.empty() && !is_monotone(cfg.sweep)) {
    throw UsageError("sweep values must be sorted");
  }
  for (double v : cfg.sweep) {
    if (!std::isfinite(v)) throw UsageError("sweep values must be finite");
  }
  if (cfg.n_samples < 100) {
    throw UsageError("n_samples must be at least 100");
  }
  if (cfg.kind == ExperimentKind::hamming && cfg.cond_type != CondType::attributes) {
    throw UsageError("hamming experiments need attribute conditioning");
  }
  if (cfg.kind == ExperimentKind::diversity) {
    num_strata(cfg.attribute);
  }
  if (cfg.kind == ExperimentKind::consistency && cfg.attribute != Factor::scale &&
      cfg.attribute != Factor::orientation && cfg.attribute != Factor::x_pos && cfg.attribute != Factor::y_pos) {
    throw UsageError(std::string("cannot swap on factor ") + to_string(cfg.attribute));
  }
  if (!(cfg.swap_fraction >= 0.0 && cfg.swap_fraction <= 1.0)) {
    throw UsageError("swap fraction must lie in [0, 1]");
  }
  if (cfg.joint.alpha_mode == AlphaMode::fixed && !(std::isfinite(cfg.joint.alpha) && cfg.joint.alpha >= 0.0)) {
    throw UsageError("alpha must be a finite non-negative number");
  }
}

GaussianStats demo_gaussian(int which) {
  GaussianStats g;
  g.mean = Vector::Zero(2);
  g.cov.resize(2, 2);
  if (which == 1) {
    g.cov << 2.0, 2.0, 2.0, 4.0;
  } else if (which == 2) {
    g.cov << 2.0, 2.0, 2.0, 2.1;
  } else {
    throw UsageError("demo distribution must be 1 or 2");
  }
  return g;
}

ResultTable run_experiment(const ExperimentConfig& cfg, const RowSink& sink) {
  validate(cfg);
  const auto sweep = cfg.sweep.empty() ? default_sweep(cfg.kind, cfg.attribute) : cfg.sweep;
  if (cfg.kind == ExperimentKind::gaussian_demo) {
    return run_gaussian_demo(cfg, sweep, sink);
  }

  const EstimateOptions opts{cfg.threads};
  const DatasetConfig base = dataset_config(cfg, sweep, cfg.seed);
  const PairedDataset reference = make_dataset(base);
  const SpriteEmbedders embedders(reference, cfg);
  const PairedEmbeddings ref_emb = embedders.embed(reference);

  const double frozen_alpha =
      cfg.joint.alpha_mode == AlphaMode::automatic ? calibrate_alpha(ref_emb) : cfg.joint.alpha;
  const auto image_dim = ref_emb.image.cols();
  const GaussianStats ref_image = estimate_gaussian(ref_emb.image, opts);
  const GaussianStats ref_unit = estimate_joint_gaussian(ref_emb, 1.0, opts);

  ResultTable table;
  table.config = cfg;
  table.config.sweep = sweep;
  table.metadata.alpha = frozen_alpha;
  table.metadata.alpha_mode = cfg.joint.alpha_mode;
  table.metadata.image_embedder_id = embedders.image_id();
  table.metadata.cond_embedder_id = embedders.cond_id();
  table.metadata.reference_id = reference_id(cfg);
  table.metadata.seed = cfg.seed;

  // The alpha sweep scores one fixed generated set at every alpha.
  std::optional<PairedDataset> alpha_generated;
  if (cfg.kind == ExperimentKind::alpha_sweep) {
    const auto other = make_dataset(dataset_config(cfg, sweep, derive_seed(cfg.seed, kGeneratedStream)));
    alpha_generated = perturb_noise(other, kAlphaSweepNoise, derive_seed(cfg.seed, kNoiseStream));
  }

  for (double v : sweep) {
    PairedDataset generated;
    double alpha = frozen_alpha;
    switch (cfg.kind) {
      case ExperimentKind::noise:
        generated = perturb_noise(reference, v, derive_seed(cfg.seed, kNoiseStream));
        break;
      case ExperimentKind::consistency:
        generated = v == 0.0 ? reference : perturb_swap(reference, cfg.attribute, v, cfg.swap_fraction);
        break;
      case ExperimentKind::diversity:
        generated = apply_diversity(base, {cfg.attribute, v, cfg.texture_count}, derive_seed(cfg.seed, kDiversityStream));
        break;
      case ExperimentKind::hamming:
        generated = perturb_attribute_swap(reference, v, derive_seed(cfg.seed, kHammingStream));
        break;
      case ExperimentKind::alpha_sweep:
        generated = *alpha_generated;
        alpha = v;
        break;
      case ExperimentKind::gaussian_demo:
        break;
    }
    const PairedEmbeddings gen_emb = embedders.embed(generated);
    const auto fid = frechet_distance(ref_image, estimate_gaussian(gen_emb.image, opts));
    const auto gen_unit = estimate_joint_gaussian(gen_emb, 1.0, opts);
    const auto fjd = frechet_distance(scale_conditioning(ref_unit, static_cast<std::size_t>(image_dim), alpha),
                                      scale_conditioning(gen_unit, static_cast<std::size_t>(image_dim), alpha));
    table.rows.push_back(make_row(v, alpha, fid, fjd));
    if (sink) sink(table.rows.back());
  }
  return table;
}

ControlFloor control_floor(const ExperimentConfig& cfg, std::uint64_t seed_a, std::uint64_t seed_b) {
  validate(cfg);
  if (seed_a == seed_b) {
    throw UsageError("samples must be disjoint: control seeds are equal");
  }
  const EstimateOptions opts{cfg.threads};
  const auto sweep = cfg.sweep.empty() ? default_sweep(cfg.kind, cfg.attribute) : cfg.sweep;

  if (cfg.kind == ExperimentKind::gaussian_demo) {
    if (cfg.exact) {
      return {};
    }
    const auto g = demo_gaussian(1);
    const auto a = split_columns(sample_gaussian(g.mean, g.cov, cfg.n_samples, seed_a));
    const auto b = split_columns(sample_gaussian(g.mean, g.cov, cfg.n_samples, seed_b));
    const double alpha = cfg.joint.alpha;
    return {compute_fid(a.image, b.image, opts).value,
            frechet_distance(estimate_joint_gaussian(a, alpha, opts), estimate_joint_gaussian(b, alpha, opts)).value};
  }

  const auto first = make_dataset(dataset_config(cfg, sweep, seed_a));
  const auto second = make_dataset(dataset_config(cfg, sweep, seed_b));
  const SpriteEmbedders embedders(first, cfg);
  const auto a = embedders.embed(first);
  const auto b = embedders.embed(second);
  const double alpha = cfg.joint.alpha_mode == AlphaMode::automatic ? calibrate_alpha(a) : cfg.joint.alpha;
  return {compute_fid(a.image, b.image, opts).value,
          frechet_distance(estimate_joint_gaussian(a, alpha, opts), estimate_joint_gaussian(b, alpha, opts)).value};
}

ControlFloor control_floor(const ExperimentConfig& cfg) {
  return control_floor(cfg, cfg.seed, derive_seed(cfg.seed, kControlStream));
}

}  // namespace fjd
