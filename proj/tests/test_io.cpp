#include "fjd/error.hpp"
#include "fjd/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

namespace fjd {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("fjd_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

EmbeddingSet three_by_two() {
  RowMatrix m(3, 2);
  m << 1.5, -2, 0.25, 1e6, -0.125, 3;
  return EmbeddingSet(m, "x");
}

std::string expect_data_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected a DataError";
  return {};
}

TEST(Fjde, RoundTripThreeByTwo) {
  const auto bytes = encode_embeddings(three_by_two());
  EXPECT_EQ(bytes.size(), kFjdeHeaderBytes + 24);
  const auto back = decode_embeddings(bytes);
  EXPECT_EQ(back.data, three_by_two().data);  // all values exact in float32
}

TEST(Fjde, LittleEndianHeader) {
  const auto bytes = encode_embeddings(three_by_two());
  EXPECT_EQ(bytes.substr(0, 4), "FJDE");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);  // version
  EXPECT_EQ(bytes.substr(5, 3), std::string(3, '\0'));
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);  // float32
  EXPECT_EQ(static_cast<unsigned char>(bytes[9]), 3);  // rows
  EXPECT_EQ(static_cast<unsigned char>(bytes[17]), 2);  // cols
  // 1.5f = 0x3fc00000
  EXPECT_EQ(static_cast<unsigned char>(bytes[25]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[27]), 0xc0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[28]), 0x3f);
}

TEST(Fjde, NarrowsToFloat) {
  RowMatrix m(1, 1);
  m << 0.1;
  EXPECT_EQ(decode_embeddings(encode_embeddings(EmbeddingSet(m))).data(0, 0), static_cast<double>(0.1f));
}

TEST(Fjde, RejectsMalformedInput) {
  EXPECT_EQ(expect_data_error([] { decode_embeddings(""); }), "not an FJDE file");
  EXPECT_EQ(expect_data_error([] { decode_embeddings("NOPE" + std::string(30, '\0')); }), "not an FJDE file");

  RowMatrix m = RowMatrix::Ones(4, 10);
  const auto good = encode_embeddings(EmbeddingSet(m));
  EXPECT_EQ(expect_data_error([&] { decode_embeddings(good.substr(0, good.size() - 1)); }),
            "corrupt file: expected 160 payload bytes, got 159");
  EXPECT_EQ(expect_data_error([&] { decode_embeddings(good + "xx"); }),
            "corrupt file: expected 160 payload bytes, got 162");

  auto bad_dtype = good;
  bad_dtype[8] = 2;
  EXPECT_EQ(expect_data_error([&] { decode_embeddings(bad_dtype); }), "unsupported dtype 2");

  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_NE(expect_data_error([&] { decode_embeddings(bad_version); }).find("unsupported FJDE version"),
            std::string::npos);
}

TEST(Fjde, RejectsNonFinite) {
  RowMatrix m(1, 2);
  m << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(encode_embeddings(EmbeddingSet(m)), DataError);
}

TEST(Fjde, FileRoundTrip) {
  TempDir dir;
  write_embeddings(three_by_two(), dir.file("a.fjde"));
  EXPECT_EQ(read_embeddings(dir.file("a.fjde")).data, three_by_two().data);
  EXPECT_THROW(read_embeddings(dir.file("missing.fjde")), DataError);
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

ResultTable sample_table(std::size_t rows) {
  ResultTable t;
  t.config.kind = ExperimentKind::noise;
  t.config.sweep = {0.0, 0.1};
  t.config.seed = 42;
  t.metadata = {17.4650291, AlphaMode::automatic, "pixel_pca:64", "one_hot:3", "synth:class", 42};
  for (std::size_t i = 0; i < rows; ++i) {
    t.rows.push_back({0.1 * static_cast<double>(i), 1.0 / 3.0 + i, 2.0 / 3.0 + i, 17.4650291, static_cast<int>(i)});
  }
  return t;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(Results, CsvLayout) {
  const auto one = lines(results_csv(sample_table(1)));
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0], "sweep_value,fid,fjd,alpha,clamped_count");
  EXPECT_EQ(lines(results_csv(sample_table(6))).size(), 7u);
  const auto two = lines(results_csv(sample_table(2)));
  EXPECT_EQ(two[2].substr(0, two[2].find(',')), "0.10000000000000001");
  EXPECT_EQ(two[2].substr(two[2].rfind(',') + 1), "1");
}

TEST(Results, CsvNumbersRoundTrip) {
  const auto t = sample_table(3);
  const auto rows = lines(results_csv(t));
  for (std::size_t i = 0; i < 3; ++i) {
    std::istringstream fields(rows[i + 1]);
    std::string f;
    std::getline(fields, f, ',');
    EXPECT_EQ(std::stod(f), t.rows[i].sweep_value);
    std::getline(fields, f, ',');
    EXPECT_EQ(std::stod(f), t.rows[i].fid);
    std::getline(fields, f, ',');
    EXPECT_EQ(std::stod(f), t.rows[i].fjd);
  }
}

TEST(Results, JsonRoundTrip) {
  const auto t = sample_table(4);
  const auto back = parse_results_json(results_json(t));
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.metadata.alpha, t.metadata.alpha);
  EXPECT_EQ(back.metadata.image_embedder_id, "pixel_pca:64");
  EXPECT_EQ(back.config.kind, ExperimentKind::noise);
  EXPECT_EQ(back.config.sweep, t.config.sweep);
  EXPECT_EQ(back.config.seed, 42u);
  EXPECT_NE(results_json(t).find("\"alpha_reported\": \"17.465029\""), std::string::npos);
}

TEST(Results, WriteAndReadFile) {
  TempDir dir;
  const auto t = sample_table(2);
  write_results(t, dir.file("r.json"), ResultFormat::json);
  EXPECT_EQ(read_results(dir.file("r.json")).rows, t.rows);
  write_results(t, dir.file("r.csv"), ResultFormat::csv);
  EXPECT_EQ(read_file(dir.file("r.csv")), results_csv(t));
}

TEST(Results, Failures) {
  TempDir dir;
  EXPECT_THROW(write_results(sample_table(1), "/nonexistent-dir/x/r.csv", ResultFormat::csv), DataError);
  EXPECT_THROW(write_results(sample_table(0), dir.file("e.csv"), ResultFormat::csv), UsageError);
  EXPECT_THROW(parse_results_json("{not json"), DataError);
  EXPECT_THROW(parse_result_format("xml"), UsageError);
}

DatasetManifest small_manifest() {
  DatasetManifest m;
  m.generator.n = 40;
  m.generator.cond_type = CondType::attributes;
  m.generator.seed = 5;
  m.perturbations.push_back({"noise", {{"sigma", 0.1}}, "", 9});
  m.perturbations.push_back({"hamming", {{"target", 2.0}}, "", 3});
  m.embedder_ids = {"pixels", "attributes"};
  m.checksums["ref_images.fjde"] = sha256_hex("x");
  return m;
}

TEST(Manifest, RoundTripAndRegenerate) {
  TempDir dir;
  const auto m = small_manifest();
  write_manifest(m, dir.file("manifest.json"));
  const auto back = read_manifest(dir.file("manifest.json"));
  EXPECT_EQ(back.generator.n, 40u);
  EXPECT_EQ(back.generator.cond_type, CondType::attributes);
  EXPECT_EQ(back.perturbations, m.perturbations);
  EXPECT_EQ(back.embedder_ids, m.embedder_ids);
  EXPECT_EQ(back.checksums, m.checksums);

  const auto regen = regenerate(back);
  const auto ref = make_dataset(40, CondType::attributes, 5);
  EXPECT_EQ(regen.reference.images, ref.images);
  ASSERT_TRUE(regen.generated.has_value());
  const auto expected = perturb_attribute_swap(perturb_noise(ref, 0.1, 9), 2.0, 3);
  EXPECT_EQ(regen.generated->images, expected.images);
  EXPECT_EQ(regen.generated->conds, expected.conds);
}

TEST(Manifest, RejectsBadChains) {
  auto m = small_manifest();
  m.perturbations.push_back({"diversity", {{"score", 0.5}, {"texture_count", 3}}, "shape", 1});
  EXPECT_THROW(regenerate(m), DataError);
  m.perturbations = {{"blur", {}, "", 0}};
  EXPECT_THROW(regenerate(m), DataError);
  m.perturbations = {{"noise", {}, "", 0}};
  EXPECT_THROW(regenerate(m), DataError);
}

TEST(DatasetExport, ShapesOfExportedSets) {
  const auto ds = make_dataset(5, CondType::bbox, 1);
  const auto img = dataset_images(ds);
  EXPECT_EQ(img.rows(), 5u);
  EXPECT_EQ(img.cols(), static_cast<std::size_t>(kCanvasSize * kCanvasSize));
  const auto cond = dataset_conditionings(ds);
  EXPECT_EQ(cond.cols(), 5u);
  EXPECT_EQ(cond.data(0, 4), static_cast<double>(ds.specs[0].shape));
}

}  // namespace
}  // namespace fjd
