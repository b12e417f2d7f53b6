#include "fjd/io.hpp"

#include "fjd/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>

namespace fjd {

using nlohmann::json;

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xffu));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Shape parse_shape(const std::string& name) {
  for (auto s : {Shape::square, Shape::ellipse, Shape::heart}) {
    if (name == to_string(s)) return s;
  }
  throw DataError("unknown shape '" + name + "'");
}

const char* to_string(AlphaMode mode) { return mode == AlphaMode::automatic ? "auto" : "fixed"; }

AlphaMode parse_alpha_mode(const std::string& name) {
  if (name == "auto") return AlphaMode::automatic;
  if (name == "fixed") return AlphaMode::fixed;
  throw DataError("unknown alpha mode '" + name + "'");
}

json shapes_json(const std::vector<Shape>& shapes) {
  json arr = json::array();
  for (auto s : shapes) arr.push_back(to_string(s));
  return arr;
}

std::vector<Shape> shapes_from(const json& arr) {
  std::vector<Shape> out;
  for (const auto& s : arr) out.push_back(parse_shape(s.get<std::string>()));
  return out;
}

json config_json(const ExperimentConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"cond_type", to_string(c.cond_type)},
          {"sweep", c.sweep},
          {"n_samples", c.n_samples},
          {"seed", c.seed},
          {"joint",
           {{"alpha", c.joint.alpha},
            {"alpha_mode", to_string(c.joint.alpha_mode)},
            {"image_embedder_id", c.joint.image_embedder_id},
            {"cond_embedder_id", c.joint.cond_embedder_id},
            {"reference_id", c.joint.reference_id}}},
          {"attribute", to_string(c.attribute)},
          {"shapes", shapes_json(c.shapes)},
          {"swap_fraction", c.swap_fraction},
          {"texture_count", c.texture_count},
          {"exact", c.exact},
          {"image_latent_dim", c.image_latent_dim},
          {"bbox_latent_dim", c.bbox_latent_dim},
          {"mask_latent_dim", c.mask_latent_dim},
          {"threads", c.threads}};
}

ExperimentConfig config_from(const json& j) {
  ExperimentConfig c;
  c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
  c.cond_type = parse_cond_type(j.at("cond_type").get<std::string>());
  c.sweep = j.at("sweep").get<std::vector<double>>();
  c.n_samples = j.at("n_samples").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& jj = j.at("joint");
  c.joint.alpha = jj.at("alpha").get<double>();
  c.joint.alpha_mode = parse_alpha_mode(jj.at("alpha_mode").get<std::string>());
  c.joint.image_embedder_id = jj.at("image_embedder_id").get<std::string>();
  c.joint.cond_embedder_id = jj.at("cond_embedder_id").get<std::string>();
  c.joint.reference_id = jj.at("reference_id").get<std::string>();
  c.attribute = parse_factor(j.at("attribute").get<std::string>());
  c.shapes = shapes_from(j.at("shapes"));
  c.swap_fraction = j.at("swap_fraction").get<double>();
  c.texture_count = j.at("texture_count").get<int>();
  c.exact = j.at("exact").get<bool>();
  c.image_latent_dim = j.at("image_latent_dim").get<int>();
  c.bbox_latent_dim = j.at("bbox_latent_dim").get<int>();
  c.mask_latent_dim = j.at("mask_latent_dim").get<int>();
  c.threads = j.at("threads").get<unsigned>();
  return c;
}

json metadata_object(const ScoreMetadata& m) {
  return {{"alpha", m.alpha},
          {"alpha_reported", format_alpha(m.alpha)},
          {"alpha_mode", to_string(m.alpha_mode)},
          {"image_embedder_id", m.image_embedder_id},
          {"cond_embedder_id", m.cond_embedder_id},
          {"reference_id", m.reference_id},
          {"seed", m.seed ? json(*m.seed) : json(nullptr)}};
}

ScoreMetadata metadata_from(const json& j) {
  ScoreMetadata m;
  m.alpha = j.at("alpha").get<double>();
  m.alpha_mode = parse_alpha_mode(j.at("alpha_mode").get<std::string>());
  m.image_embedder_id = j.at("image_embedder_id").get<std::string>();
  m.cond_embedder_id = j.at("cond_embedder_id").get<std::string>();
  m.reference_id = j.at("reference_id").get<std::string>();
  if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

json generator_json(const DatasetConfig& g) {
  json out = {{"cond_type", to_string(g.cond_type)},
              {"n", g.n},
              {"seed", g.seed},
              {"shapes", shapes_json(g.shapes)},
              {"grouping", nullptr}};
  if (g.grouping) {
    out["grouping"] = {{"attribute", to_string(g.grouping->attribute)},
                       {"step", g.grouping->step},
                       {"size", g.grouping->size}};
  }
  return out;
}

DatasetConfig generator_from(const json& j) {
  DatasetConfig g;
  g.cond_type = parse_cond_type(j.at("cond_type").get<std::string>());
  g.n = j.at("n").get<std::size_t>();
  g.seed = j.at("seed").get<std::uint64_t>();
  g.shapes = shapes_from(j.at("shapes"));
  if (!j.at("grouping").is_null()) {
    const auto& gj = j.at("grouping");
    g.grouping = Grouping{parse_factor(gj.at("attribute").get<std::string>()), gj.at("step").get<double>(),
                          gj.at("size").get<int>()};
  }
  return g;
}

template <typename F>
auto with_json_errors(const std::string& what, F&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError("malformed " + what + ": " + e.what());
  }
}

double param(const PerturbationStep& step, const std::string& name) {
  const auto it = step.params.find(name);
  if (it == step.params.end()) {
    throw DataError("perturbation '" + step.op + "' is missing parameter '" + name + "'");
  }
  return it->second;
}

}  // namespace

std::string encode_embeddings(const EmbeddingSet& set) {
  std::string out;
  out.reserve(kFjdeHeaderBytes + set.rows() * set.cols() * 4);
  out.append("FJDE", 4);
  put_le<std::uint32_t>(out, kFjdeVersion);
  put_le<std::uint8_t>(out, kFjdeFloat32);
  put_le<std::uint64_t>(out, set.rows());
  put_le<std::uint64_t>(out, set.cols());
  for (Eigen::Index r = 0; r < set.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < set.data.cols(); ++c) {
      const double v = set.data(r, c);
      if (!std::isfinite(v)) {
        throw DataError("invalid embedding: non-finite value in row " + std::to_string(r));
      }
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

EmbeddingFileHeader decode_header(std::string_view bytes) {
  if (bytes.size() < kFjdeHeaderBytes || bytes.substr(0, 4) != "FJDE") {
    throw DataError("not an FJDE file");
  }
  EmbeddingFileHeader h;
  h.version = get_le<std::uint32_t>(bytes, 4);
  h.dtype = get_le<std::uint8_t>(bytes, 8);
  h.rows = get_le<std::uint64_t>(bytes, 9);
  h.cols = get_le<std::uint64_t>(bytes, 17);
  if (h.version != kFjdeVersion) {
    throw DataError("unsupported FJDE version " + std::to_string(h.version));
  }
  if (h.dtype != kFjdeFloat32) {
    throw DataError("unsupported dtype " + std::to_string(h.dtype));
  }
  return h;
}

EmbeddingSet decode_embeddings(std::string_view bytes, std::string id) {
  const auto h = decode_header(bytes);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 4;
  if (h.cols != 0 && h.rows > limit / h.cols) {
    throw DataError("corrupt file: header dimensions overflow");
  }
  const std::uint64_t expected = h.rows * h.cols * 4;
  const std::uint64_t actual = bytes.size() - kFjdeHeaderBytes;
  if (expected != actual) {
    throw DataError("corrupt file: expected " + std::to_string(expected) + " payload bytes, got " +
                    std::to_string(actual));
  }
  RowMatrix data(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  std::size_t offset = kFjdeHeaderBytes;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c, offset += 4) {
      data(r, c) = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
    }
  }
  return EmbeddingSet(std::move(data), std::move(id));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path + "' for reading");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot open '" + path + "' for writing");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw DataError("failed writing '" + path + "'");
  }
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) { write_file(path, encode_embeddings(set)); }

EmbeddingSet read_embeddings(const std::string& path) { return decode_embeddings(read_file(path), path); }

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorKind::data, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void write_manifest(const DatasetManifest& m, const std::string& path) {
  json steps = json::array();
  for (const auto& s : m.perturbations) {
    steps.push_back({{"op", s.op}, {"params", s.params}, {"factor", s.factor}, {"seed", s.seed}});
  }
  const json j = {{"schema_version", m.schema_version},
                  {"generator", generator_json(m.generator)},
                  {"perturbations", steps},
                  {"embedder_ids", m.embedder_ids},
                  {"checksums", m.checksums}};
  write_file(path, j.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::string& path) {
  const auto text = read_file(path);
  return with_json_errors("manifest", [&] {
    const auto j = json::parse(text);
    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1) {
      throw DataError("unsupported manifest schema version " + std::to_string(m.schema_version));
    }
    m.generator = generator_from(j.at("generator"));
    for (const auto& s : j.at("perturbations")) {
      m.perturbations.push_back({s.at("op").get<std::string>(), s.at("params").get<std::map<std::string, double>>(),
                                 s.at("factor").get<std::string>(), s.at("seed").get<std::uint64_t>()});
    }
    m.embedder_ids = j.at("embedder_ids").get<std::vector<std::string>>();
    m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
    return m;
  });
}

RegeneratedDatasets regenerate(const DatasetManifest& m) {
  RegeneratedDatasets out{make_dataset(m.generator), std::nullopt};
  for (std::size_t i = 0; i < m.perturbations.size(); ++i) {
    const auto& s = m.perturbations[i];
    const PairedDataset& current = out.generated ? *out.generated : out.reference;
    if (s.op == "noise") {
      out.generated = perturb_noise(current, param(s, "sigma"), s.seed);
    } else if (s.op == "swap") {
      out.generated = perturb_swap(current, parse_factor(s.factor), param(s, "offset"), param(s, "fraction"));
    } else if (s.op == "hamming") {
      out.generated = perturb_attribute_swap(current, param(s, "target"), s.seed);
    } else if (s.op == "diversity") {
      if (i != 0) {
        throw DataError("diversity must be the first perturbation in a chain");
      }
      DiversityConfig d{parse_factor(s.factor), param(s, "score"), static_cast<int>(param(s, "texture_count"))};
      out.generated = apply_diversity(m.generator, d, s.seed);
    } else {
      throw DataError("unknown perturbation '" + s.op + "'");
    }
  }
  return out;
}

EmbeddingSet dataset_images(const PairedDataset& ds) {
  if (ds.size() == 0) {
    throw DataError("dataset is empty");
  }
  RowMatrix out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.images.front().size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& px = ds.images[i].pixels;
    out.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXf>(px.data(), static_cast<Eigen::Index>(px.size())).cast<double>();
  }
  return EmbeddingSet(std::move(out), "images");
}

EmbeddingSet dataset_conditionings(const PairedDataset& ds) {
  if (ds.size() == 0) {
    throw DataError("dataset is empty");
  }
  const auto width = conditioning_record(ds.conds.front()).size();
  RowMatrix out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto rec = conditioning_record(ds.conds[i]);
    out.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rec.data(), static_cast<Eigen::Index>(rec.size()));
  }
  return EmbeddingSet(std::move(out), std::string("conditionings:") + to_string(ds.cond_type));
}

ResultFormat parse_result_format(const std::string& name) {
  if (name == "csv") return ResultFormat::csv;
  if (name == "json") return ResultFormat::json;
  throw UsageError("unknown output format '" + name + "' (expected csv or json)");
}

std::string results_csv(const ResultTable& table) {
  std::string out = "sweep_value,fid,fjd,alpha,clamped_count\n";
  for (const auto& r : table.rows) {
    out += format_number(r.sweep_value) + "," + format_number(r.fid) + "," + format_number(r.fjd) + "," +
           format_number(r.alpha) + "," + std::to_string(r.clamped_count) + "\n";
  }
  return out;
}

std::string results_json(const ResultTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"sweep_value", r.sweep_value},
                    {"fid", r.fid},
                    {"fjd", r.fjd},
                    {"alpha", r.alpha},
                    {"clamped_count", r.clamped_count}});
  }
  const json j = {{"schema_version", 1},
                  {"config", config_json(table.config)},
                  {"metadata", metadata_object(table.metadata)},
                  {"rows", rows}};
  return j.dump(2) + "\n";
}

ResultTable parse_results_json(std::string_view text) {
  return with_json_errors("result file", [&] {
    const auto j = json::parse(text);
    if (j.at("schema_version").get<int>() != 1) {
      throw DataError("unsupported result schema version");
    }
    ResultTable t;
    t.config = config_from(j.at("config"));
    t.metadata = metadata_from(j.at("metadata"));
    for (const auto& r : j.at("rows")) {
      t.rows.push_back({r.at("sweep_value").get<double>(), r.at("fid").get<double>(), r.at("fjd").get<double>(),
                        r.at("alpha").get<double>(), r.at("clamped_count").get<int>()});
    }
    return t;
  });
}

std::string score_json(const FrechetResult& fid, const JointScore& fjd) {
  const auto detail = [](const FrechetResult& r) {
    return json{{"value", r.value},           {"mean_term", r.mean_term},
                {"trace_term", r.trace_term}, {"trace_reference", r.trace_a},
                {"trace_generated", r.trace_b}, {"clamped_eigenvalues", r.clamped_eigenvalues}};
  };
  const json j = {{"fid", fid.value},
                  {"fjd", fjd.result.value},
                  {"fid_detail", detail(fid)},
                  {"fjd_detail", detail(fjd.result)},
                  {"metadata", metadata_object(fjd.metadata)}};
  return j.dump(2) + "\n";
}

std::string metadata_json(const ScoreMetadata& metadata) { return metadata_object(metadata).dump() + "\n"; }

void write_results(const ResultTable& table, const std::string& path, ResultFormat format) {
  if (table.rows.empty()) {
    throw UsageError("result table is empty");
  }
  write_file(path, format == ResultFormat::csv ? results_csv(table) : results_json(table));
}

ResultTable read_results(const std::string& path) { return parse_results_json(read_file(path)); }

}  // namespace fjd
