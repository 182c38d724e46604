// Copyright 2026 The EAsT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>

#include "east/manifest.hpp"

using namespace east;
using Code = ManifestError::Code;

namespace {

Code parse_code(const std::string& csv, std::optional<std::uint64_t> n_rows = std::nullopt) {
  try {
    Manifest::parse(csv, n_rows);
  } catch (const ManifestError& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse succeeded:\n" << csv;
  return Code::bad_header;
}

const char* kCsv =
    "id,row,split,labels\n"
    "a,0,train,guitar;drums\n"
    "b,1,valid,piano\n"
    "c,2,test,\n"
    "\"d,1\",3,train,\"drums;voice\"\n";

Manifest ten_items() {
  std::string csv = "id,row,split,labels\n";
  for (int i = 0; i < 10; ++i) csv += "s" + std::to_string(i) + "," + std::to_string(i) + ",train,x\n";
  return Manifest::parse(csv);
}

}  // namespace

TEST(Manifest, ParsesEntriesInOrder) {
  const auto m = Manifest::parse(kCsv, 4);
  ASSERT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.entries[0].labels, (std::vector<std::string>{"guitar", "drums"}));
  EXPECT_EQ(m.entries[1].split, Split::valid);
  EXPECT_TRUE(m.entries[2].labels.empty());
  EXPECT_EQ(m.entries[3].id, "d,1");
  EXPECT_EQ(m.rows(Split::train), (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(m.max_row(), 3u);
}

TEST(Manifest, CsvRoundTrip) {
  const auto m = Manifest::parse(kCsv);
  const auto again = Manifest::parse(m.to_csv());
  EXPECT_EQ(again.to_csv(), m.to_csv());
  ASSERT_EQ(again.entries.size(), 4u);
  EXPECT_EQ(again.entries[3].id, "d,1");

  const auto path = std::filesystem::path(::testing::TempDir()) / "east_manifest.csv";
  m.save(path);
  EXPECT_EQ(Manifest::load(path).to_csv(), m.to_csv());
}

TEST(Manifest, CrlfAndBlankLinesAccepted) {
  const auto m = Manifest::parse("id,row,split,labels\r\na,0,train,x\r\n\r\n");
  EXPECT_EQ(m.entries.size(), 1u);
}

TEST(Manifest, DistinctErrors) {
  EXPECT_EQ(parse_code("id,row,labels\na,0,x\n"), Code::bad_header);
  EXPECT_EQ(parse_code("id,row,split,labels\na,0,train\n"), Code::malformed_row);
  EXPECT_EQ(parse_code("id,row,split,labels\na,-1,train,x\n"), Code::malformed_row);
  EXPECT_EQ(parse_code("id,row,split,labels\na,0,train,x\na,1,test,y\n"), Code::duplicate_id);
  EXPECT_EQ(parse_code("id,row,split,labels\na,0,train,x\nb,0,test,y\n"), Code::duplicate_row);
  EXPECT_EQ(parse_code("id,row,split,labels\na,5,train,x\n", 5), Code::row_out_of_range);
  EXPECT_EQ(parse_code("id,row,split,labels\na,0,dev,x\n"), Code::unknown_split);
}

TEST(Manifest, ErrorMessagesCarryLineNumbers) {
  try {
    Manifest::parse("id,row,split,labels\na,0,train,x\nb,1,holdout,y\n", std::nullopt, "m.csv");
    FAIL();
  } catch (const ManifestError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("m.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("holdout"), std::string::npos) << msg;
  }
}

TEST(LabelSpace, SortedUnion) {
  const auto m = Manifest::parse(kCsv);
  const auto space = LabelSpace::from_manifest(m, TaskKind::multilabel);
  EXPECT_EQ(space.names, (std::vector<std::string>{"drums", "guitar", "piano", "voice"}));
  EXPECT_EQ(space.index_of("piano"), 2u);
  EXPECT_FALSE(space.index_of("bass").has_value());
}

TEST(Targets, MultilabelAndSinglelabel) {
  const auto m = Manifest::parse(kCsv);
  const auto space = LabelSpace::from_manifest(m, TaskKind::multilabel);
  const auto t = targets_by_row(m, space, 4);
  EXPECT_EQ(t.binary, Tensor::from_rows({{1, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}, {1, 0, 0, 1}}));

  const auto single = Manifest::parse("id,row,split,labels\na,1,train,dog\nb,0,train,cat\nc,2,test,dog\n");
  const auto classes = LabelSpace::from_manifest(single, TaskKind::singlelabel);
  const auto st = targets_by_row(single, classes, 3);
  EXPECT_EQ(st.classes, (std::vector<std::size_t>{0, 1, 1}));
  EXPECT_THROW(targets_by_row(m, LabelSpace::from_manifest(m, TaskKind::singlelabel), 4), ValidationError);
}

TEST(Batches, SizesAndDeterminism) {
  const auto m = ten_items();
  const auto b = make_batches(m, Split::train, 4, 7, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].size(), 4u);
  EXPECT_EQ(b[1].size(), 4u);
  EXPECT_EQ(b[2].size(), 2u);
  EXPECT_EQ(make_batches(m, Split::train, 4, 7, 0), b);

  std::vector<std::size_t> all;
  for (const auto& batch : b) all.insert(all.end(), batch.begin(), batch.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, m.rows(Split::train));
}

TEST(Batches, EpochAndSeedChangeOrder) {
  const auto m = ten_items();
  EXPECT_NE(make_batches(m, Split::train, 10, 7, 0), make_batches(m, Split::train, 10, 7, 1));
  EXPECT_NE(make_batches(m, Split::train, 10, 7, 0), make_batches(m, Split::train, 10, 8, 0));
}

TEST(Batches, EmptySplitAndZeroBatch) {
  const auto m = ten_items();
  EXPECT_THROW(make_batches(m, Split::test, 4, 0, 0), ValidationError);
  EXPECT_THROW(make_batches(m, Split::train, 0, 0, 0), ValidationError);
}

TEST(NameMap, Parse) {
  const auto map = parse_name_map("model_label,eval_label\nguitar,Guitar\n\"a,b\",c\n");
  ASSERT_EQ(map.size(), 2u);
  EXPECT_EQ(map[0], (std::pair<std::string, std::string>{"guitar", "Guitar"}));
  EXPECT_EQ(map[1].first, "a,b");
  EXPECT_THROW(parse_name_map("from,to\na,b\n"), ValidationError);
  EXPECT_THROW(parse_name_map("model_label,eval_label\na\n"), ValidationError);
}

TEST(Csv, QuotedFields) {
  EXPECT_EQ(split_csv_line(R"(a,"b ""q"", c",,d)"),
            (std::vector<std::string>{"a", "b \"q\", c", "", "d"}));
}
