/*
 * Copyright 2026 The lstmsplit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "lstmsplit/config.hpp"
#include "lstmsplit/errors.hpp"
#include "lstmsplit/metrics.hpp"
#include "support/fixtures.hpp"

namespace lstmsplit {
namespace {

TEST(Config, DefaultsFollowTheReferenceSetup) {
  const SplitConfig c = SplitConfig{}.resolved();
  EXPECT_EQ(c.num_layers, 2u);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{200, 200}));
  EXPECT_EQ(c.cut, 1u);
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.epochs, 200u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.seq_len, 128u);
  EXPECT_EQ(c.num_classes, 5u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SetParsesEveryKind) {
  SplitConfig c;
  c.set("dataset", "synth");
  c.set("hidden", "8, 4");
  c.set("lr", "0.01");
  c.set("dp", "true");
  c.set("epsilon", "inf");
  c.set("handoff", "p2p");
  EXPECT_EQ(c.dataset, DatasetKind::kSynth);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{8, 4}));
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.01);
  EXPECT_TRUE(c.dp.enabled);
  EXPECT_TRUE(std::isinf(c.dp.epsilon));
  EXPECT_EQ(c.handoff, HandoffMode::kPeerToPeer);
}

TEST(Config, BadValuesAndKeysThrow) {
  SplitConfig c;
  EXPECT_THROW(c.set("batch", "-1"), ConfigError);
  EXPECT_THROW(c.set("lr", "fast"), ConfigError);
  EXPECT_THROW(c.set("colour", "blue"), ConfigError);
  EXPECT_THROW(c.set("dataset", "mnist"), ConfigError);
}

TEST(Config, ValidateRejectsImpossibleCombinations) {
  SplitConfig c;
  c.cut = 2;
  EXPECT_THROW(c.resolved().validate(), ConfigError);
  c = SplitConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.resolved().validate(), ConfigError);
  c = SplitConfig{};
  c.dp.enabled = true;
  c.dp.delta = 2.0;
  EXPECT_THROW(c.resolved().validate(), ConfigError);
  c = SplitConfig{};
  c.seq_len = 100;
  EXPECT_THROW(c.resolved().validate(), ConfigError);
}

TEST(Config, LoadFileWithComments) {
  const auto dir = testing::scratch_dir("config-file");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# desk-scale run\ndataset = synth\nclients = 3   # three hospitals\n\nepochs=4\n";
  }
  SplitConfig c;
  c.load_file(dir / "run.cfg");
  EXPECT_EQ(c.dataset, DatasetKind::kSynth);
  EXPECT_EQ(c.clients, 3u);
  EXPECT_EQ(c.epochs, 4u);
  {
    std::ofstream out(dir / "bad.cfg");
    out << "clients 3\n";
  }
  EXPECT_THROW(c.load_file(dir / "bad.cfg"), ConfigError);
}

TEST(Config, HashIgnoresLocalSettingsOnly) {
  SplitConfig a, b;
  b.data_path = "/elsewhere.csv";
  b.eval_every = 5;
  EXPECT_EQ(a.hash(), b.hash());
  b.learning_rate = 0.5;
  EXPECT_NE(a.hash(), b.hash());
  SplitConfig c;
  c.hidden = {200, 200};  // same resolved architecture as the single-value default
  EXPECT_EQ(a.hash(), c.hash());
}

TEST(Metrics, AccuracyExamples) {
  EXPECT_DOUBLE_EQ(accuracy(3, 4), 75.0);
  EXPECT_DOUBLE_EQ(accuracy(7, 7), 100.0);
  EXPECT_DOUBLE_EQ(accuracy(0, 5), 0.0);
  EXPECT_THROW(accuracy(0, 0), Error);
}

TEST(Metrics, TimeComplexityIsTheProduct) {
  EXPECT_DOUBLE_EQ(time_complexity(2, 3, 4, 0.5), 12.0);
  EXPECT_DOUBLE_EQ(time_complexity(1, 1, 1, 0.37), 0.37);
  // K=5, E=200 and TC = 6810.1 s imply B * t_b = 6.8101 s per client-epoch.
  EXPECT_NEAR(6810.1 / (5.0 * 200.0), 6.8101, 1e-12);
}

TEST(Metrics, CommComplexityOfCounters) {
  const CommComplexity none = comm_complexity(LinkCounters{});
  EXPECT_EQ(none.seconds, 0.0);
  EXPECT_EQ(none.bytes, 0u);
  LinkCounters c;
  c.bytes_sent = 9 + 34;
  c.bytes_received = 9 + 34;
  EXPECT_EQ(comm_complexity(c).bytes, 2u * (9 + 34));
}

TEST(Metrics, CsvHasTheDocumentedColumns) {
  const auto dir = testing::scratch_dir("metrics-csv");
  RunMetrics m;
  EpochRecord e;
  e.client = 1;
  e.epoch = 1;
  e.train_loss = 1.5;
  e.train_acc = 50;
  m.epochs.push_back(e);
  m.test_accuracy = 75.0;
  write_metrics_csv(dir / "metrics.csv", m);
  std::ifstream in(dir / "metrics.csv");
  std::string header, row, summary;
  std::getline(in, header);
  std::getline(in, row);
  std::getline(in, summary);
  EXPECT_EQ(header, "client,epoch,train_loss,train_acc,test_acc,tb_sec,comm_bytes");
  EXPECT_EQ(row.rfind("1,1,1.5,50,,", 0), 0u);
  EXPECT_EQ(summary.rfind("summary,", 0), 0u);
}

}  // namespace
}  // namespace lstmsplit
