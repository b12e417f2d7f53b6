#include "fjd/synth.hpp"

#include "fjd/error.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

namespace fjd {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Half side of a scale-1 square, in pixels.
constexpr double kUnitHalfSize = 16.0;

struct Rotation {
  double c;
  double s;
};

// Exact values at multiples of 90 degrees so that symmetric shapes rasterise
// identically under quarter turns.
Rotation rotation_for(double degrees) {
  const double wrapped = std::fmod(std::fmod(degrees, 360.0) + 360.0, 360.0);
  if (wrapped == 0.0) return {1.0, 0.0};
  if (wrapped == 90.0) return {0.0, 1.0};
  if (wrapped == 180.0) return {-1.0, 0.0};
  if (wrapped == 270.0) return {0.0, -1.0};
  const double rad = wrapped * kPi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

bool inside_shape(Shape shape, double u, double v) {
  switch (shape) {
    case Shape::square:
      return std::max(std::abs(u), std::abs(v)) <= 1.0;
    case Shape::ellipse:
      return u * u + 4.0 * v * v <= 1.0;
    case Shape::heart: {
      // (x^2 + y^2 - 1)^3 - x^2 y^3 <= 0, y pointing up, nudged to centre.
      const double x = u;
      const double y = 0.1 - v;
      const double r = x * x + y * y - 1.0;
      return r * r * r - x * x * y * y * y <= 0.0;
    }
  }
  return false;
}

float texture_value(Texture texture, int row, int col) {
  switch (texture) {
    case Texture::checker:
      return ((col / 4 + row / 4) % 2 == 0) ? 1.0f : 0.0f;
    case Texture::stripes:
      return (((col + row) / 2) % 2 == 0) ? 1.0f : 0.0f;
    case Texture::dots: {
      const double cx = 6.0 * std::floor((col + 0.5) / 6.0) + 3.0;
      const double cy = 6.0 * std::floor((row + 0.5) / 6.0) + 3.0;
      const double dx = col + 0.5 - cx;
      const double dy = row + 0.5 - cy;
      return dx * dx + dy * dy <= 4.0 ? 1.0f : 0.0f;
    }
  }
  return 0.0f;
}

std::vector<Shape> checked_shapes(const std::vector<Shape>& shapes) {
  if (shapes.empty()) {
    throw UsageError("dataset needs at least one shape");
  }
  return shapes;
}

double attribute_value(const SpriteSpec& spec, Factor f) {
  switch (f) {
    case Factor::shape: return static_cast<double>(spec.shape);
    case Factor::scale: return spec.scale;
    case Factor::orientation: return spec.orientation;
    case Factor::x_pos: return spec.x_pos;
    case Factor::y_pos: return spec.y_pos;
    case Factor::texture: return static_cast<double>(spec.texture);
  }
  return 0.0;
}

bool offset_matches(Factor f, double from, double to, double offset) {
  double diff = to - from;
  if (f == Factor::orientation) {
    diff = std::fmod(std::fmod(diff, 360.0) + 360.0, 360.0);
  }
  return std::abs(diff - offset) <= 1e-6;
}

// Conditioning-relevant factors other than `attribute`, quantised for exact
// comparison. Texture never enters a conditioning and is ignored.
std::vector<long long> swap_key(const SpriteSpec& spec, Factor attribute) {
  std::vector<long long> key;
  if (attribute != Factor::shape) key.push_back(static_cast<long long>(spec.shape));
  if (attribute != Factor::scale) key.push_back(std::llround(spec.scale * 1e6));
  if (attribute != Factor::orientation) key.push_back(std::llround(spec.orientation * 1e6));
  if (attribute != Factor::x_pos) key.push_back(spec.x_pos);
  if (attribute != Factor::y_pos) key.push_back(spec.y_pos);
  return key;
}

SpriteSpec draw_spec(std::mt19937_64& rng, const std::vector<Shape>& shapes) {
  SpriteSpec spec;
  spec.shape = shapes[std::uniform_int_distribution<std::size_t>(0, shapes.size() - 1)(rng)];
  spec.scale = scale_at(std::uniform_int_distribution<int>(0, kNumScales - 1)(rng));
  spec.orientation = std::uniform_int_distribution<int>(0, 359)(rng);
  const int m = position_margin(spec.scale);
  spec.x_pos = std::uniform_int_distribution<int>(m, kCanvasSize - m)(rng);
  spec.y_pos = std::uniform_int_distribution<int>(m, kCanvasSize - m)(rng);
  return spec;
}

// Base spec of a group whose members differ along `g.attribute`.
SpriteSpec draw_group_base(std::mt19937_64& rng, const std::vector<Shape>& shapes, const Grouping& g) {
  const int span_steps = g.size - 1;
  SpriteSpec spec = draw_spec(rng, shapes);
  switch (g.attribute) {
    case Factor::scale: {
      const int step = static_cast<int>(std::lround(g.step / kScaleStep));
      const int top = kNumScales - 1 - span_steps * step;
      if (step <= 0 || top < 0) {
        throw UsageError("scale grouping does not fit the scale lattice");
      }
      spec.scale = scale_at(std::uniform_int_distribution<int>(0, top)(rng));
      // Positions must stay legal at the largest scale of the group.
      const int m = position_margin(scale_at(scale_index(spec.scale) + span_steps * step));
      spec.x_pos = std::uniform_int_distribution<int>(m, kCanvasSize - m)(rng);
      spec.y_pos = std::uniform_int_distribution<int>(m, kCanvasSize - m)(rng);
      break;
    }
    case Factor::orientation:
      break;
    case Factor::x_pos:
    case Factor::y_pos: {
      const int span = span_steps * static_cast<int>(std::lround(g.step));
      const int m = position_margin(spec.scale);
      if (kCanvasSize - m - span < m) {
        throw UsageError("position grouping does not fit the canvas");
      }
      const int base = std::uniform_int_distribution<int>(m, kCanvasSize - m - span)(rng);
      (g.attribute == Factor::x_pos ? spec.x_pos : spec.y_pos) = base;
      break;
    }
    default:
      throw UsageError(std::string("cannot group rows by ") + to_string(g.attribute));
  }
  return spec;
}

SpriteSpec group_member(SpriteSpec spec, const Grouping& g, int member) {
  const double delta = g.step * member;
  switch (g.attribute) {
    case Factor::scale:
      spec.scale = scale_at(scale_index(spec.scale) + static_cast<int>(std::lround(delta / kScaleStep)));
      break;
    case Factor::orientation:
      spec.orientation = std::fmod(spec.orientation + delta, 360.0);
      break;
    case Factor::x_pos:
      spec.x_pos += static_cast<int>(std::lround(delta));
      break;
    case Factor::y_pos:
      spec.y_pos += static_cast<int>(std::lround(delta));
      break;
    default:
      break;
  }
  return spec;
}

const AttributeCond& attributes_of(const Conditioning& c) {
  const auto* a = std::get_if<AttributeCond>(&c);
  if (a == nullptr) {
    throw DataError("conditioning is not a binary attribute vector");
  }
  return *a;
}

int hamming(const AttributeCond& a, const AttributeCond& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    d += a.bits[i] != b.bits[i] ? 1 : 0;
  }
  return d;
}

}  // namespace

const char* to_string(Shape s) {
  switch (s) {
    case Shape::square: return "square";
    case Shape::ellipse: return "ellipse";
    case Shape::heart: return "heart";
  }
  return "unknown";
}

const char* to_string(Texture t) {
  switch (t) {
    case Texture::checker: return "checker";
    case Texture::stripes: return "stripes";
    case Texture::dots: return "dots";
  }
  return "unknown";
}

const char* to_string(Factor f) {
  switch (f) {
    case Factor::shape: return "shape";
    case Factor::scale: return "scale";
    case Factor::orientation: return "orientation";
    case Factor::x_pos: return "x_pos";
    case Factor::y_pos: return "y_pos";
    case Factor::texture: return "texture";
  }
  return "unknown";
}

const char* to_string(CondType c) {
  switch (c) {
    case CondType::class_label: return "class";
    case CondType::bbox: return "bbox";
    case CondType::mask: return "mask";
    case CondType::attributes: return "attributes";
  }
  return "unknown";
}

Factor parse_factor(const std::string& name) {
  if (name == "shape") return Factor::shape;
  if (name == "scale") return Factor::scale;
  if (name == "orientation") return Factor::orientation;
  if (name == "x_pos" || name == "position") return Factor::x_pos;
  if (name == "y_pos") return Factor::y_pos;
  if (name == "texture") return Factor::texture;
  throw UsageError("unknown factor '" + name + "'");
}

CondType parse_cond_type(const std::string& name) {
  if (name == "class") return CondType::class_label;
  if (name == "bbox") return CondType::bbox;
  if (name == "mask") return CondType::mask;
  if (name == "attributes") return CondType::attributes;
  throw UsageError("unknown conditioning type '" + name + "'");
}

int position_margin(double scale) {
  // Every shape fits inside the circle through the square's corners.
  return static_cast<int>(std::ceil(kUnitHalfSize * std::sqrt(2.0) * scale - 1e-9));
}

double scale_at(int lattice_index) { return kMinScale + kScaleStep * lattice_index; }

int scale_index(double scale) { return static_cast<int>(std::lround((scale - kMinScale) / kScaleStep)); }

bool is_legal(const SpriteSpec& spec) {
  if (!(spec.scale >= kMinScale - 1e-9 && spec.scale <= 1.0 + 1e-9)) return false;
  if (!(spec.orientation >= 0.0 && spec.orientation < 360.0)) return false;
  const int m = position_margin(spec.scale);
  return spec.x_pos >= m && spec.x_pos <= kCanvasSize - m && spec.y_pos >= m && spec.y_pos <= kCanvasSize - m;
}

RenderedSprite render_sprite(const SpriteSpec& spec) {
  if (!is_legal(spec)) {
    throw DataError("illegal sprite spec");
  }
  RenderedSprite out;
  out.image = Image(kCanvasSize, kCanvasSize);
  out.mask = Image(kCanvasSize, kCanvasSize);
  out.class_label = static_cast<int>(spec.shape);

  const Rotation rot = rotation_for(spec.orientation);
  const double size = kUnitHalfSize * spec.scale;
  const int m = position_margin(spec.scale);
  int min_col = kCanvasSize, max_col = -1, min_row = kCanvasSize, max_row = -1;
  for (int row = std::max(0, spec.y_pos - m); row < std::min(kCanvasSize, spec.y_pos + m); ++row) {
    for (int col = std::max(0, spec.x_pos - m); col < std::min(kCanvasSize, spec.x_pos + m); ++col) {
      const double px = col + 0.5 - spec.x_pos;
      const double py = row + 0.5 - spec.y_pos;
      const double u = (rot.c * px + rot.s * py) / size;
      const double v = (-rot.s * px + rot.c * py) / size;
      if (!inside_shape(spec.shape, u, v)) {
        continue;
      }
      out.mask.at(row, col) = static_cast<float>(out.class_label + 1);
      out.image.at(row, col) = texture_value(spec.texture, row, col);
      min_col = std::min(min_col, col);
      max_col = std::max(max_col, col);
      min_row = std::min(min_row, row);
      max_row = std::max(max_row, row);
    }
  }
  if (max_col >= 0) {
    const double w = kCanvasSize;
    out.bbox = {(min_col + max_col + 1) / (2.0 * w), (min_row + max_row + 1) / (2.0 * w),
                (max_col + 1 - min_col) / w, (max_row + 1 - min_row) / w};
  }
  return out;
}

Image bbox_raster(const BBox& box, int label) {
  Image img(kCanvasSize, kCanvasSize);
  const int c0 = static_cast<int>(std::lround((box.x_center - box.width / 2) * kCanvasSize));
  const int c1 = static_cast<int>(std::lround((box.x_center + box.width / 2) * kCanvasSize));
  const int r0 = static_cast<int>(std::lround((box.y_center - box.height / 2) * kCanvasSize));
  const int r1 = static_cast<int>(std::lround((box.y_center + box.height / 2) * kCanvasSize));
  for (int row = std::max(0, r0); row < std::min(kCanvasSize, r1); ++row) {
    for (int col = std::max(0, c0); col < std::min(kCanvasSize, c1); ++col) {
      img.at(row, col) = static_cast<float>(label);
    }
  }
  return img;
}

std::vector<std::uint8_t> attribute_bits(const SpriteSpec& spec) {
  std::vector<std::uint8_t> bits(kAttributeBits, 0);
  bits[static_cast<int>(spec.shape)] = 1;
  bits[3 + static_cast<int>(spec.texture)] = 1;
  bits[6 + stratum_of(spec, Factor::scale)] = 1;
  bits[9 + std::clamp(static_cast<int>(spec.orientation / 90.0), 0, 3)] = 1;
  bits[13 + std::clamp(spec.x_pos / 16, 0, 3)] = 1;
  bits[17 + std::clamp(spec.y_pos / 16, 0, 3)] = 1;
  return bits;
}

Conditioning make_conditioning(const SpriteSpec& spec, const RenderedSprite& sprite, CondType type) {
  switch (type) {
    case CondType::class_label: return ClassCond{sprite.class_label};
    case CondType::bbox: return BoxCond{sprite.bbox, sprite.class_label};
    case CondType::mask: return MaskCond{sprite.mask};
    case CondType::attributes: return AttributeCond{attribute_bits(spec)};
  }
  throw UsageError("unknown conditioning type");
}

std::vector<double> conditioning_record(const Conditioning& cond) {
  return std::visit(
      [](const auto& c) -> std::vector<double> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ClassCond>) {
          return {static_cast<double>(c.label)};
        } else if constexpr (std::is_same_v<T, BoxCond>) {
          return {c.box.x_center, c.box.y_center, c.box.width, c.box.height, static_cast<double>(c.label)};
        } else if constexpr (std::is_same_v<T, MaskCond>) {
          return {c.mask.pixels.begin(), c.mask.pixels.end()};
        } else {
          return {c.bits.begin(), c.bits.end()};
        }
      },
      cond);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PairedDataset make_dataset(const DatasetConfig& config) {
  const auto shapes = checked_shapes(config.shapes);
  if (config.grouping && config.grouping->size < 1) {
    throw UsageError("group size must be at least 1");
  }
  PairedDataset ds;
  ds.seed = config.seed;
  ds.cond_type = config.cond_type;
  ds.images.reserve(config.n);
  ds.conds.reserve(config.n);
  ds.specs.reserve(config.n);

  // Stream layout: texture draws use odd streams, spec draws even streams.
  for (std::size_t row = 0; row < config.n; ++row) {
    SpriteSpec spec;
    if (config.grouping) {
      const auto& g = *config.grouping;
      const std::size_t group = row / static_cast<std::size_t>(g.size);
      std::mt19937_64 group_rng(derive_seed(config.seed, 2 * group));
      spec = group_member(draw_group_base(group_rng, shapes, g), g, static_cast<int>(row % g.size));
    } else {
      std::mt19937_64 rng(derive_seed(config.seed, 2 * row));
      spec = draw_spec(rng, shapes);
    }
    std::mt19937_64 texture_rng(derive_seed(config.seed, 2 * row + 1));
    spec.texture = static_cast<Texture>(std::uniform_int_distribution<int>(0, kNumTextures - 1)(texture_rng));

    auto sprite = render_sprite(spec);
    ds.conds.push_back(make_conditioning(spec, sprite, config.cond_type));
    ds.images.push_back(std::move(sprite.image));
    ds.specs.push_back(spec);
  }
  return ds;
}

PairedDataset make_dataset(std::size_t n, CondType cond_type, std::uint64_t seed) {
  DatasetConfig config;
  config.n = n;
  config.cond_type = cond_type;
  config.seed = seed;
  return make_dataset(config);
}

PairedDataset perturb_noise(const PairedDataset& ds, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw UsageError("noise sigma must be non-negative");
  }
  PairedDataset out = ds;
  if (sigma == 0.0) {
    return out;
  }
  for (std::size_t row = 0; row < out.size(); ++row) {
    std::mt19937_64 rng(derive_seed(seed, row));
    std::normal_distribution<double> noise(0.0, sigma);
    for (float& p : out.images[row].pixels) {
      p = static_cast<float>(std::clamp(p + noise(rng), 0.0, 1.0));
    }
  }
  return out;
}

PairedDataset perturb_swap(const PairedDataset& ds, Factor attribute, double offset, double fraction) {
  if (attribute != Factor::scale && attribute != Factor::orientation && attribute != Factor::x_pos &&
      attribute != Factor::y_pos) {
    throw UsageError(std::string("cannot swap on factor ") + to_string(attribute));
  }
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw UsageError("swap fraction must lie in [0, 1]");
  }
  if (!(offset > 0.0)) {
    throw UsageError("swap offset must be positive");
  }
  const std::size_t wanted = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(ds.size()) / 2.0));
  PairedDataset out = ds;
  if (wanted == 0) {
    return out;
  }

  std::map<std::vector<long long>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    buckets[swap_key(ds.specs[i], attribute)].push_back(i);
  }

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  std::vector<char> used(ds.size(), 0);
  for (auto& [key, rows] : buckets) {
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return attribute_value(ds.specs[a], attribute) < attribute_value(ds.specs[b], attribute);
    });
    for (std::size_t i : rows) {
      if (used[i]) continue;
      const double from = attribute_value(ds.specs[i], attribute);
      for (std::size_t j : rows) {
        if (used[j] || j == i) continue;
        if (offset_matches(attribute, from, attribute_value(ds.specs[j], attribute), offset)) {
          used[i] = used[j] = 1;
          candidates.emplace_back(i, j);
          break;
        }
      }
    }
  }

  if (candidates.size() < wanted) {
    throw DataError("not enough swap candidates: need " + std::to_string(wanted) + " pairs at offset " +
                    std::to_string(offset) + ", achievable " + std::to_string(candidates.size()));
  }
  for (std::size_t k = 0; k < wanted; ++k) {
    const auto [i, j] = candidates[k * candidates.size() / wanted];
    std::swap(out.conds[i], out.conds[j]);
  }
  return out;
}

int num_strata(Factor factor) {
  switch (factor) {
    case Factor::shape: return kNumShapes;
    case Factor::scale:
    case Factor::orientation:
    case Factor::x_pos:
    case Factor::y_pos: return 3;
    case Factor::texture: break;
  }
  throw UsageError(std::string("unknown stratification factor: ") + to_string(factor));
}

int stratum_of(const SpriteSpec& spec, Factor factor) {
  switch (factor) {
    case Factor::shape: return static_cast<int>(spec.shape);
    case Factor::scale: return std::clamp(scale_index(spec.scale) * 3 / kNumScales, 0, 2);
    case Factor::orientation: return std::clamp(static_cast<int>(spec.orientation / 120.0), 0, 2);
    case Factor::x_pos: return std::clamp(spec.x_pos * 3 / (kCanvasSize + 1), 0, 2);
    case Factor::y_pos: return std::clamp(spec.y_pos * 3 / (kCanvasSize + 1), 0, 2);
    case Factor::texture: break;
  }
  throw UsageError(std::string("unknown stratification factor: ") + to_string(factor));
}

PairedDataset apply_diversity(const DatasetConfig& base, const DiversityConfig& config, std::uint64_t seed) {
  if (!(config.score >= 0.0 && config.score <= 1.0)) {
    throw UsageError("diversity score must lie in [0, 1]");
  }
  if (config.texture_count < 1 || config.texture_count > kNumTextures) {
    throw UsageError("texture count must lie in [1, " + std::to_string(kNumTextures) + "]");
  }
  num_strata(config.stratify_by);

  PairedDataset ds = make_dataset(base);
  for (std::size_t row = 0; row < ds.size(); ++row) {
    auto& spec = ds.specs[row];
    std::mt19937_64 rng(derive_seed(seed, row));
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u < config.score) {
      continue;
    }
    const auto assigned = static_cast<Texture>(stratum_of(spec, config.stratify_by) % config.texture_count);
    if (assigned != spec.texture) {
      spec.texture = assigned;
      ds.images[row] = render_sprite(spec).image;
    }
  }
  return ds;
}

PairedDataset perturb_attribute_swap(const PairedDataset& ds, double target_mean_hamming, std::uint64_t seed) {
  if (!(target_mean_hamming >= 0.0)) {
    throw UsageError("Hamming target must be non-negative");
  }
  const std::size_t n = ds.size();
  std::vector<const AttributeCond*> attrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    attrs[i] = &attributes_of(ds.conds[i]);
  }
  PairedDataset out = ds;
  if (target_mean_hamming == 0.0 || n < 2) {
    if (target_mean_hamming > 0.0) {
      throw DataError("unreachable mean Hamming target: closest achievable 0");
    }
    return out;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // Cycle over the first m shuffled rows: row order[k] takes the conditioning
  // of order[k + 1], the last takes order[0].
  std::vector<double> chain(n, 0.0);  // chain[k] = sum of ham(order[i], order[i+1]) for i < k
  for (std::size_t k = 1; k < n; ++k) {
    chain[k] = chain[k - 1] + hamming(*attrs[order[k - 1]], *attrs[order[k]]);
  }
  std::size_t best_m = 0;
  double best_mean = 0.0;
  for (std::size_t m = 2; m <= n; ++m) {
    const double total = chain[m - 1] + hamming(*attrs[order[m - 1]], *attrs[order[0]]);
    const double mean = total / static_cast<double>(n);
    if (std::abs(mean - target_mean_hamming) < std::abs(best_mean - target_mean_hamming)) {
      best_m = m;
      best_mean = mean;
    }
  }
  if (std::abs(best_mean - target_mean_hamming) > 0.05 * target_mean_hamming) {
    throw DataError("unreachable mean Hamming target " + std::to_string(target_mean_hamming) +
                    ": closest achievable " + std::to_string(best_mean));
  }
  for (std::size_t k = 0; k < best_m; ++k) {
    out.conds[order[k]] = ds.conds[order[(k + 1) % best_m]];
  }
  return out;
}

double mean_hamming(const PairedDataset& original, const PairedDataset& permuted) {
  if (original.size() != permuted.size() || original.size() == 0) {
    throw DataError("datasets must be non-empty and of equal size");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    total += hamming(attributes_of(original.conds[i]), attributes_of(permuted.conds[i]));
  }
  return total / static_cast<double>(original.size());
}

EmbeddingSet sample_gaussian(const Vector& mean, const Matrix& cov, std::size_t n, std::uint64_t seed) {
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d) {
    throw DataError("dimension mismatch: covariance does not match mean");
  }
  if (n < 1) {
    throw UsageError("sample count must be at least 1");
  }
  if (!cov.isApprox(cov.transpose(), 1e-12) && !(cov - cov.transpose()).isZero(1e-12)) {
    throw DataError("covariance is not symmetric");
  }
  const auto eig = detail::symmetric_eigen(cov, false);
  const double scale = d > 0 ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  if (d > 0 && eig.values.minCoeff() < -1e-10 * std::max(scale, 1e-300)) {
    throw DataError("covariance is not PSD");
  }

  // Cholesky that tolerates zero pivots (semi-definite input).
  Matrix chol = Matrix::Zero(d, d);
  const double pivot_tol = 1e-12 * std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double pivot = cov(j, j) - chol.row(j).head(j).squaredNorm();
    if (pivot <= pivot_tol) {
      continue;
    }
    chol(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      chol(i, j) = (cov(i, j) - chol.row(i).head(j).dot(chol.row(j).head(j))) / chol(j, j);
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RowMatrix out(static_cast<Eigen::Index>(n), d);
  Vector z(d);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index k = 0; k < d; ++k) {
      z[k] = normal(rng);
    }
    out.row(r) = (mean + chol * z).transpose();
  }
  return EmbeddingSet(std::move(out), "gaussian:seed=" + std::to_string(seed));
}

EmbeddingSet sample_gaussian_2d(const Vector& mean, const Matrix& cov, std::size_t n, std::uint64_t seed) {
  if (mean.size() != 2) {
    throw DataError("dimension mismatch: expected a 2-D Gaussian");
  }
  return sample_gaussian(mean, cov, n, seed);
}

}  // namespace fjd
