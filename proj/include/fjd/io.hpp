#pragma once

#include "fjd/harness.hpp"
#include "fjd/synth.hpp"
#include "fjd/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fjd {

// FJDE layout, all little-endian: "FJDE", u32 version, u8 dtype, u64 rows,
// u64 cols, then rows * cols float32 values in row-major order.
inline constexpr std::uint32_t kFjdeVersion = 1;
inline constexpr std::uint8_t kFjdeFloat32 = 1;
inline constexpr std::size_t kFjdeHeaderBytes = 4 + 4 + 1 + 8 + 8;

struct EmbeddingFileHeader {
  std::uint32_t version = kFjdeVersion;
  std::uint8_t dtype = kFjdeFloat32;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

/// Values are narrowed to float32; anything not representable exactly loses
/// precision. Non-finite values are rejected.
std::string encode_embeddings(const EmbeddingSet& set);
/// Validates the header before touching the payload.
EmbeddingSet decode_embeddings(std::string_view bytes, std::string id = {});
EmbeddingFileHeader decode_header(std::string_view bytes);

void write_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet read_embeddings(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

struct PerturbationStep {
  std::string op;  // noise, swap, diversity, hamming
  std::map<std::string, double> params;
  std::string factor;  // swap attribute or stratification factor, empty otherwise
  std::uint64_t seed = 0;

  bool operator==(const PerturbationStep&) const = default;
};

/// Enough to regenerate a synthetic dataset and check the emitted files.
struct DatasetManifest {
  int schema_version = 1;
  DatasetConfig generator;
  std::vector<PerturbationStep> perturbations;
  std::vector<std::string> embedder_ids;
  std::map<std::string, std::string> checksums;  // file name -> SHA-256 hex
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

/// Rebuilds the reference dataset and, if the chain is non-empty, the result
/// of applying it.
struct RegeneratedDatasets {
  PairedDataset reference;
  std::optional<PairedDataset> generated;
};
RegeneratedDatasets regenerate(const DatasetManifest& manifest);

/// Images flattened to rows of pixels; conditionings in their record form.
EmbeddingSet dataset_images(const PairedDataset& ds);
EmbeddingSet dataset_conditionings(const PairedDataset& ds);

enum class ResultFormat { csv, json };
ResultFormat parse_result_format(const std::string& name);

/// `sweep_value,fid,fjd,alpha,clamped_count` with %.17g numbers.
std::string results_csv(const ResultTable& table);
/// Config echo, score metadata and rows.
std::string results_json(const ResultTable& table);
ResultTable parse_results_json(std::string_view text);

/// A single FID/FJD score with its reporting block.
std::string score_json(const FrechetResult& fid, const JointScore& fjd);
/// Metadata block alone, for CSV outputs that carry it out of band.
std::string metadata_json(const ScoreMetadata& metadata);

void write_results(const ResultTable& table, const std::string& path, ResultFormat format);
ResultTable read_results(const std::string& path);

}  // namespace fjd
