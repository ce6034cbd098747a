#include <gtest/gtest.h>

#include "minleaf/boost.hpp"
#include "minleaf/error.hpp"
#include "support.hpp"

using namespace minleaf;
using minleaf::support::make_dataset;

namespace {

const ShallowTree kSplit = ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1));

HybridTree all_majority(const ShallowTree& t) {
  HybridTree h;
  h.shallow = t;
  for (NodeId leaf : t.leaf_ids()) h.extenders[leaf] = MajorityExtender{t.node(leaf).label};
  return h;
}

}  // namespace

TEST(Extend, PureLeafGetsMajority) {
  const auto ds = make_dataset({{0.1}, {0.2}, {0.8}, {0.9}}, {0, 0, 1, 1});
  const auto h = extend_tree(kSplit, ds, 3, 3, 0);
  ASSERT_EQ(h.extenders.size(), 2u);
  for (const auto& [leaf, e] : h.extenders) {
    ASSERT_EQ(extender_kind(e), "majority");
    EXPECT_EQ(std::get<MajorityExtender>(e).label, kSplit.node(leaf).label);
  }
}

TEST(Extend, FewSamplesOfAClassGetSingleTree) {
  // Left leaf: eight A and two B.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0.04 * i});
    labels.push_back(i < 8 ? 0 : 1);
  }
  rows.push_back({0.9});
  labels.push_back(1);
  const auto ds = make_dataset(rows, labels);
  const auto h = extend_tree(kSplit, ds, 3, 3, 0);
  const auto& left = h.extenders.at(kSplit.node(0).left);
  ASSERT_EQ(extender_kind(left), "single_tree");
  const auto& model = std::get<SingleTreeExtender>(left).model;
  EXPECT_EQ(model.config, single_tree_config());
  EXPECT_EQ(model.trees.at(0).size(), 1u);
  EXPECT_LE(model.trees.at(0).at(0).depth(), 5);
}

TEST(Extend, MixedLeafBeatsMajority) {
  // 60/40 leaf whose classes are separable along the second feature.
  Rng rng(4);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    const int y = i < 60 ? 0 : 1;
    rows.push_back({0.4 * uniform01(rng), y ? 0.6 + 0.4 * uniform01(rng) : 0.4 * uniform01(rng)});
    labels.push_back(y);
  }
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0.9, 0.5});
    labels.push_back(1);
  }
  const auto ds = make_dataset(rows, labels);
  const auto h = extend_tree(kSplit, ds, 5, 3, 1);
  const auto& left = h.extenders.at(kSplit.node(0).left);
  EXPECT_EQ(extender_kind(left), "gbdt");
  std::vector<std::size_t> idx(100);
  for (std::size_t i = 0; i < 100; ++i) idx[i] = i;
  const auto leaf = ds.subset(idx);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < leaf.num_samples(); ++i) correct += extender_predict(left, leaf.row(i)) == leaf.label(i);
  EXPECT_GE(correct, 60u);
}

TEST(Extend, HybridNeverWorseOnTraining) {
  Rng rng(8);
  for (int rep = 0; rep < 6; ++rep) {
    const auto ds = support::structured_dataset(rng, 160, 3, 0.3);
    const auto t = reduce_tree(support::random_tree(rng, 3, 2, 2), ds);
    const auto h = extend_tree(t, ds, 2, 3, static_cast<std::uint64_t>(rep));
    EXPECT_GE(hybrid_accuracy(h, ds), model_accuracy(t, ds)) << rep;
  }
}

TEST(Extend, Deterministic) {
  Rng rng(9);
  const auto ds = support::structured_dataset(rng, 120, 3, 0.2);
  const auto t = reduce_tree(ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1)), ds);
  EXPECT_EQ(extend_tree(t, ds, 3, 3, 5).to_json(), extend_tree(t, ds, 3, 3, 5).to_json());
}

TEST(Extend, Errors) {
  const auto ds = make_dataset({{0.6}, {0.8}}, {0, 1});
  EXPECT_THROW(extend_tree(kSplit, ds, 1, 3, 0), ModelError);  // empty left leaf
  EXPECT_THROW(extend_tree(ShallowTree::leaf(0), ds, 0, 3, 0), ModelError);
  EXPECT_THROW(extend_tree(ShallowTree::leaf(0), ds, 1, 1, 0), ModelError);
}

TEST(Hybrid, AllMajorityEqualsShallow) {
  Rng rng(3);
  const auto t = support::random_tree(rng, 2, 3, 3);
  const auto h = all_majority(t);
  for (int i = 0; i < 200; ++i) {
    const double x[] = {uniform01(rng), uniform01(rng)};
    EXPECT_EQ(predict_hybrid(h, x), t.predict(x));
  }
  const auto ds = support::random_dataset(rng, 50, 2, 3, 5);
  EXPECT_DOUBLE_EQ(agreement_rate(h, ds), 1.0);
  EXPECT_DOUBLE_EQ(hybrid_accuracy(h, ds), model_accuracy(t, ds));
}

TEST(Hybrid, AgreementCounts) {
  auto flipped = all_majority(kSplit);
  for (auto& [leaf, e] : flipped.extenders) e = MajorityExtender{1 - kSplit.node(leaf).label};
  const auto ds = make_dataset({{0.1}, {0.9}, {0.3}}, {0, 1, 1});
  EXPECT_DOUBLE_EQ(agreement_rate(flipped, ds), 0.0);

  // 62 of 100 samples land in the leaf whose extender agrees.
  auto partial = all_majority(kSplit);
  partial.extenders[kSplit.node(0).right] = MajorityExtender{0};
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({i < 62 ? 0.2 : 0.8});
    labels.push_back(i % 2);
  }
  EXPECT_DOUBLE_EQ(agreement_rate(partial, make_dataset(rows, labels)), 0.62);
}

TEST(Hybrid, GbdtLeafDelegates) {
  Rng rng(6);
  const auto ds = support::structured_dataset(rng, 100, 2, 0.1);
  GbdtConfig cfg;
  cfg.n_trees = 10;
  auto h = all_majority(ShallowTree::leaf(0));
  const auto model = gbdt_train(ds, cfg, 0);
  h.extenders[0] = GbdtExtender{model, 0.9};
  for (std::size_t i = 0; i < ds.num_samples(); ++i) EXPECT_EQ(h.predict(ds.row(i)), model.predict(ds.row(i)));
}

TEST(Hybrid, JsonRoundTrip) {
  Rng rng(7);
  const auto ds = support::structured_dataset(rng, 150, 3, 0.25);
  const auto t = reduce_tree(ShallowTree::branch(0, 0.5, ShallowTree::leaf(0), ShallowTree::leaf(1)), ds);
  const auto h = extend_tree(t, ds, 2, 3, 1);
  const auto back = HybridTree::from_json(h.to_json());
  EXPECT_EQ(back.to_json(), h.to_json());
  for (std::size_t i = 0; i < ds.num_samples(); ++i) EXPECT_EQ(back.predict(ds.row(i)), h.predict(ds.row(i)));
  EXPECT_THROW(HybridTree::from_json(R"({"shallow":{"leaf":{"class":0}},"extenders":[]})"), ParseError);
  EXPECT_THROW(HybridTree::from_json(
                   R"({"shallow":{"leaf":{"class":0}},"extenders":[{"leaf":0,"kind":"magic"}]})"),
               ParseError);
}
