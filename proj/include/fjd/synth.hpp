#pragma once

#include "fjd/embedders.hpp"
#include "fjd/image.hpp"
#include "fjd/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fjd {

inline constexpr int kCanvasSize = 64;
inline constexpr int kNumShapes = 3;
inline constexpr int kNumTextures = 3;
/// Scale lattice: 0.3, 0.4, ..., 1.0.
inline constexpr int kNumScales = 8;
inline constexpr double kMinScale = 0.3;
inline constexpr double kScaleStep = 0.1;
/// Attribute vectors: one-hot shape(3), texture(3), scale bin(3), orientation
/// quadrant(4), x quarter(4), y quarter(4).
inline constexpr int kAttributeBits = 21;

enum class Shape { square, ellipse, heart };
enum class Texture { checker, stripes, dots };
enum class Factor { shape, scale, orientation, x_pos, y_pos, texture };
enum class CondType { class_label, bbox, mask, attributes };

const char* to_string(Shape s);
const char* to_string(Texture t);
const char* to_string(Factor f);
const char* to_string(CondType c);
Factor parse_factor(const std::string& name);
CondType parse_cond_type(const std::string& name);

/// Generative factors of one sprite. The sprite's centre sits at pixel-edge
/// coordinates (x_pos, y_pos); at scale 1 a square has a 32 px side.
struct SpriteSpec {
  Shape shape = Shape::square;
  double scale = 1.0;
  double orientation = 0.0;  // degrees
  int x_pos = kCanvasSize / 2;
  int y_pos = kCanvasSize / 2;
  Texture texture = Texture::checker;

  bool operator==(const SpriteSpec&) const = default;
};

/// Smallest centre-to-edge distance that keeps every shape of this scale on
/// the canvas under any rotation.
int position_margin(double scale);
bool is_legal(const SpriteSpec& spec);
double scale_at(int lattice_index);
int scale_index(double scale);

struct RenderedSprite {
  Image image;      // texture inside the silhouette, 0 elsewhere
  int class_label = 0;
  BBox bbox;        // tight box around the silhouette
  Image mask;       // class_label + 1 inside the silhouette, 0 elsewhere
};

RenderedSprite render_sprite(const SpriteSpec& spec);
/// Label raster of a box: `label` inside, 0 outside.
Image bbox_raster(const BBox& box, int label);
std::vector<std::uint8_t> attribute_bits(const SpriteSpec& spec);

struct ClassCond {
  int label = 0;
  bool operator==(const ClassCond&) const = default;
};
struct BoxCond {
  BBox box;
  int label = 0;
  bool operator==(const BoxCond&) const = default;
};
struct MaskCond {
  Image mask;
  bool operator==(const MaskCond&) const = default;
};
struct AttributeCond {
  std::vector<std::uint8_t> bits;
  bool operator==(const AttributeCond&) const = default;
};
using Conditioning = std::variant<ClassCond, BoxCond, MaskCond, AttributeCond>;

Conditioning make_conditioning(const SpriteSpec& spec, const RenderedSprite& sprite, CondType type);
/// Flat numeric form: {label}, {x, y, w, h, label}, mask pixels, or bits.
std::vector<double> conditioning_record(const Conditioning& cond);

/// Rows generated in runs of `size` that share every factor except
/// `attribute`, which advances by `step` along the run. Gives the swap
/// perturbation partners at offsets step, 2 step, ..., (size - 1) step.
struct Grouping {
  Factor attribute = Factor::x_pos;
  double step = 1.0;
  int size = 5;
};

struct DatasetConfig {
  std::size_t n = 10000;
  CondType cond_type = CondType::class_label;
  std::uint64_t seed = 0;
  std::vector<Shape> shapes = {Shape::square, Shape::ellipse, Shape::heart};
  std::optional<Grouping> grouping;
};

struct PairedDataset {
  std::vector<Image> images;
  std::vector<Conditioning> conds;
  std::vector<SpriteSpec> specs;
  std::uint64_t seed = 0;
  CondType cond_type = CondType::class_label;

  std::size_t size() const { return images.size(); }
};

/// Mixes a base seed with a stream index (row, group, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Factors drawn uniformly over the legal lattice, one RNG stream per row (or
/// per group), so the output does not depend on evaluation order.
PairedDataset make_dataset(const DatasetConfig& config);
PairedDataset make_dataset(std::size_t n, CondType cond_type, std::uint64_t seed);

/// Additive N(0, sigma) pixel noise followed by clipping to [0, 1].
PairedDataset perturb_noise(const PairedDataset& ds, double sigma, std::uint64_t seed);

/// Exchanges the conditionings of floor(fraction * N / 2) disjoint row pairs
/// whose specs agree in every conditioning-relevant factor except `attribute`,
/// which differs by exactly `offset`. Candidates are matched greedily over
/// sorted factor tuples; the chosen pairs are spread evenly over the candidates.
PairedDataset perturb_swap(const PairedDataset& ds, Factor attribute, double offset, double fraction);

struct DiversityConfig {
  Factor stratify_by = Factor::shape;
  double score = 1.0;
  int texture_count = kNumTextures;
};

int num_strata(Factor factor);
int stratum_of(const SpriteSpec& spec, Factor factor);

/// Duplicates the base dataset, then re-draws each row's texture: kept with
/// probability `score`, otherwise replaced by its stratum's assigned texture
/// (stratum j gets texture j mod T).
PairedDataset apply_diversity(const DatasetConfig& base, const DiversityConfig& config, std::uint64_t seed);

/// Permutes attribute-vector conditionings along one cycle over a seeded
/// random subset of rows, sized so that the mean Hamming distance between new
/// and original vectors is closest to the target.
PairedDataset perturb_attribute_swap(const PairedDataset& ds, double target_mean_hamming, std::uint64_t seed);
double mean_hamming(const PairedDataset& original, const PairedDataset& permuted);

/// n rows of mean + L z with L the (semi-definite) Cholesky factor of cov.
EmbeddingSet sample_gaussian(const Vector& mean, const Matrix& cov, std::size_t n, std::uint64_t seed);
EmbeddingSet sample_gaussian_2d(const Vector& mean, const Matrix& cov, std::size_t n, std::uint64_t seed);

}  // namespace fjd
