#include <sstream>

#include <gtest/gtest.h>

#include "hetrank/csv_io.hpp"
#include "test_support.hpp"

using namespace hetrank;
using testing_support::TempDir;

namespace {

std::vector<std::tuple<std::string, std::string, std::string, bool>> labelled(const ComparisonDataset& d) {
  std::vector<std::tuple<std::string, std::string, std::string, bool>> out;
  for (const Comparison& c : d.records()) {
    out.emplace_back(d.user_label(c.user), d.item_label(c.winner), d.item_label(c.loser), c.is_virtual);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(LoadCsv, ParsesSmallFile) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nu1,A,B\nu1,B,C\nu2,A,C\n");
  const LoadedDataset loaded = load_csv(path);
  EXPECT_EQ(loaded.data.n_items(), 3U);
  EXPECT_EQ(loaded.data.n_users(), 2U);
  EXPECT_EQ(loaded.data.user_count(0), 2U);
  EXPECT_EQ(loaded.data.user_count(1), 1U);
  EXPECT_EQ(loaded.report.rows, 3U);
  EXPECT_EQ(loaded.report.accepted, 3U);
  EXPECT_EQ(loaded.data.item_label(0), "A");
  EXPECT_EQ(loaded.data.user_label(1), "u2");
}

TEST(LoadCsv, RejectsSelfComparisons) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nu1,A,B\nu1,A,A\n");
  const LoadedDataset loaded = load_csv(path);
  EXPECT_EQ(loaded.data.size(), 1U);
  EXPECT_EQ(loaded.report.self_comparisons, 1U);
  ASSERT_EQ(loaded.report.rejected.size(), 1U);
  EXPECT_EQ(loaded.report.rejected[0].line, 3U);
}

TEST(LoadCsv, KeepsAndCountsDuplicates) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nu1,A,B\nu1,A,B\nu2,A,B\n");
  const LoadedDataset loaded = load_csv(path);
  EXPECT_EQ(loaded.data.size(), 3U);
  EXPECT_EQ(loaded.report.duplicates, 1U);
}

TEST(LoadCsv, ColumnMappingAndExtraColumns) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "worker,time,better,worse\nw,1,X,Y\nw,2,Y,Z\n");
  CsvSchema schema;
  schema.user = "worker";
  schema.winner = "better";
  schema.loser = "worse";
  const LoadedDataset loaded = load_csv(path, schema);
  EXPECT_EQ(loaded.data.n_items(), 3U);
  EXPECT_EQ(loaded.data.item_label(2), "Z");
}

TEST(LoadCsv, HandlesBomCrlfAndQuotes) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "\xEF\xBB\xBFuser,winner,loser\r\nu1,\"United States\",\"Congo, Rep.\"\r\n\r\n");
  const LoadedDataset loaded = load_csv(path);
  ASSERT_EQ(loaded.data.size(), 1U);
  EXPECT_EQ(loaded.data.item_label(0), "United States");
  EXPECT_EQ(loaded.data.item_label(1), "Congo, Rep.");
}

TEST(LoadCsv, ShortRowsAreRejected) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nu1,A\nu1,A,B\n");
  const LoadedDataset loaded = load_csv(path);
  EXPECT_EQ(loaded.data.size(), 1U);
  EXPECT_EQ(loaded.report.rejected.size(), 1U);
}

TEST(LoadCsv, MissingColumnNamesIt) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner\nu1,A\n");
  try {
    load_csv(path);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("loser"), std::string::npos);
  }
}

TEST(LoadCsv, UnreadableFileNamesPath) {
  try {
    load_csv("/nonexistent/dir/log.csv");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/log.csv"), std::string::npos);
  }
}

TEST(LoadCsv, EmptyFileIsSchemaError) {
  TempDir dir("csv");
  EXPECT_THROW(load_csv(dir.write("a.csv", "")), SchemaError);
}

TEST(LoadCsv, IdsStableAcrossReload) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nb,Q,P\na,P,R\nb,R,Q\n");
  const LoadedDataset first = load_csv(path);
  const LoadedDataset second = load_csv(path);
  EXPECT_TRUE(std::equal(first.data.records().begin(), first.data.records().end(),
                         second.data.records().begin(), second.data.records().end()));
  EXPECT_EQ(first.data.item_labels(), second.data.item_labels());
}

TEST(WriteCsv, RoundTripKeepsIdsAndRecords) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nb,Q,P\na,P,R\nb,R,Q\nb,R,Q\n");
  const LoadedDataset first = load_csv(path);
  write_csv(first.data, dir.file("b.csv"));
  const LoadedDataset second = load_csv(dir.file("b.csv"));
  EXPECT_EQ(first.data.item_labels(), second.data.item_labels());
  EXPECT_EQ(first.data.user_labels(), second.data.user_labels());
  EXPECT_TRUE(std::equal(first.data.records().begin(), first.data.records().end(),
                         second.data.records().begin(), second.data.records().end()));
}

TEST(WriteCsv, AugmentedDatasetRoundTrips) {
  TempDir dir("csv");
  const auto path = dir.write("a.csv", "user,winner,loser\nu,A,B\nv,B,C\n");
  const ComparisonDataset augmented = add_virtual_node(load_csv(path).data);
  write_csv(augmented, dir.file("b.csv"));
  EXPECT_NE(testing_support::slurp(dir.file("b.csv")).find("user,winner,loser,virtual\n"), std::string::npos);
  const LoadedDataset back = load_csv(dir.file("b.csv"));
  EXPECT_TRUE(back.data.has_virtual_node());
  EXPECT_EQ(back.data.n_items(), augmented.n_items());
  EXPECT_EQ(back.data.virtual_item(), augmented.virtual_item());
  EXPECT_EQ(back.data.virtual_user(), augmented.virtual_user());
  EXPECT_EQ(labelled(back.data), labelled(augmented));
}

TEST(TruthCsv, LoadsAndAligns) {
  TempDir dir("csv");
  const auto log = dir.write("a.csv", "user,winner,loser\nu,B,A\nu,C,B\n");
  const auto truth_path = dir.write("t.csv", "item,score\nA,1\nB,2\nC,3\n");
  const LoadedDataset loaded = load_csv(log);
  const GroundTruth truth = align_truth(loaded.data, load_truth_csv(truth_path));
  ASSERT_TRUE(truth.scores);
  EXPECT_EQ(*truth.scores, (std::vector<double>{2.0, 1.0, 3.0}));  // ids follow B, A, C
  EXPECT_EQ(truth.ranking, (Ranking{2, 0, 1}));
}

TEST(TruthCsv, MissingItemAndBadValues) {
  TempDir dir("csv");
  const LoadedDataset loaded = load_csv(dir.write("a.csv", "user,winner,loser\nu,B,A\n"));
  EXPECT_THROW(align_truth(loaded.data, load_truth_csv(dir.write("t.csv", "item,score\nA,1\n"))), SchemaError);
  EXPECT_THROW(load_truth_csv(dir.write("u.csv", "item,score\nA,abc\n")), SchemaError);
  EXPECT_THROW(load_truth_csv(dir.write("v.csv", "item,score\nA,1\nA,2\n")), SchemaError);
  EXPECT_THROW(load_truth_csv(dir.write("w.csv", "item,value\nA,1\n")), SchemaError);
}

TEST(TruthCsv, TsvFilesAreTabSeparated) {
  TempDir dir("csv");
  const auto path = dir.write("ranking.tsv", "rank\titem\tscore\n1\tUnited States\t0.5\n2\tB\t-0.5\n");
  const auto truth = load_truth_csv(path);
  ASSERT_EQ(truth.size(), 2U);
  EXPECT_EQ(truth[0].item, "United States");
  EXPECT_DOUBLE_EQ(truth[1].score, -0.5);
}

TEST(TruthCsv, WriteRoundTrip) {
  TempDir dir("csv");
  const std::vector<TruthEntry> truth = {{"a,b", 0.1}, {"c", 1.0 / 3.0}};
  write_truth_csv(truth, dir.file("t.csv"));
  const auto back = load_truth_csv(dir.file("t.csv"));
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[0].item, "a,b");
  EXPECT_EQ(back[1].score, 1.0 / 3.0);
}

TEST(CountryFixture, RanksByPopulation) {
  const auto truth = load_truth_csv(HETRANK_TEST_DATA_DIR "/country_population_truth.csv");
  ASSERT_EQ(truth.size(), 15U);
  std::vector<double> scores;
  for (const TruthEntry& e : truth) scores.push_back(e.score);
  const Ranking order = ground_truth_ranking(scores);
  EXPECT_EQ(truth[order.front()].item, "China");
  EXPECT_EQ(truth[order[1]].item, "India");
  EXPECT_EQ(truth[order[2]].item, "United States");
  EXPECT_EQ(truth[order.back()].item, "Vietnam");
}
