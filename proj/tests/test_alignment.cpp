#include <doctest.h>

#include <cmath>

#include "aligngroup/alignment.hpp"
#include "aligngroup/hypergraph.hpp"
#include "aligngroup/rng.hpp"

using namespace aligngroup;

namespace {

Hypergraph toy_hypergraph() {
  InteractionDataset ds;
  ds.num_users = 2;
  ds.num_items = 2;
  ds.num_groups = 2;
  ds.group_members = {{0, 1}, {0}};
  ds.group_item_train.insert({0, 0});
  return build_hypergraph(ds);
}

Mat random_mat(Index r, Index c, Rng& rng) {
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.normal(0.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("member_scope: small is users, big appends training items") {
  const auto h = toy_hypergraph();
  const auto small = member_scope(h, Scope::kSmall);
  const auto big = member_scope(h, Scope::kBig);
  CHECK(small[0] == std::vector<Index>{0, 1});
  CHECK(big[0] == std::vector<Index>{0, 1, 2 + 0});  // item 0 offset by |U|
  // group with no items: big equals small
  CHECK(big[1] == small[1]);
}

TEST_CASE("common_preference: hand-evaluated centroid and barycenter") {
  ad::Tape tape;
  Mat members(3, 2);

  SUBCASE("two-point symmetry: both strategies give (1,1)") {
    Mat rows(2, 2);
    rows << 0, 2, 2, 0;
    const auto c =
        tape.set_minmax_mid_rows(tape.leaf(rows), {{0, 1}});
    const auto b = tape.set_mean_rows(tape.leaf(rows), {{0, 1}});
    CHECK(tape.value(c)(0, 0) == doctest::Approx(1.0));
    CHECK(tape.value(c)(0, 1) == doctest::Approx(1.0));
    CHECK(tape.value(b)(0, 0) == doctest::Approx(1.0));
    CHECK(tape.value(b)(0, 1) == doctest::Approx(1.0));
  }

  SUBCASE("three points where both agree at (2,0)") {
    members << 0, 0, 2, 2, 4, -2;
    const auto c =
        tape.set_minmax_mid_rows(tape.leaf(members), {{0, 1, 2}});
    const auto b = tape.set_mean_rows(tape.leaf(members), {{0, 1, 2}});
    CHECK(tape.value(c)(0, 0) == doctest::Approx(2.0));
    CHECK(tape.value(c)(0, 1) == doctest::Approx(0.0));
    CHECK(tape.value(b)(0, 0) == doctest::Approx(2.0));
    CHECK(tape.value(b)(0, 1) == doctest::Approx(0.0));
  }

  SUBCASE("outliers split the strategies") {
    members << 0, 0, 1, 0, 10, 0;
    const auto c =
        tape.set_minmax_mid_rows(tape.leaf(members), {{0, 1, 2}});
    const auto b = tape.set_mean_rows(tape.leaf(members), {{0, 1, 2}});
    CHECK(tape.value(c)(0, 0) == doctest::Approx(5.0));
    CHECK(tape.value(b)(0, 0) == doctest::Approx(11.0 / 3.0));
  }
}

TEST_CASE("common_preference: strategies coincide for groups of <= 2 members") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat rows = random_mat(2, 5, rng);
    ad::Tape tape;
    const auto leaf = tape.leaf(rows);
    const auto c = tape.set_minmax_mid_rows(leaf, {{0, 1}, {0}});
    const auto b = tape.set_mean_rows(leaf, {{0, 1}, {0}});
    CHECK((tape.value(c) - tape.value(b)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("common_preference: centroid stays inside the member bounding box") {
  Rng rng(19);
  const Mat users = random_mat(6, 4, rng);
  const Mat items = random_mat(3, 4, rng);
  std::vector<std::vector<Index>> members{{0, 1, 2, 6}, {3, 4}, {5, 7, 8}};
  ad::Tape tape;
  const auto common =
      common_preferences(tape, tape.leaf(users), tape.leaf(items), members,
                         Strategy::kCentroid);
  Mat combined(9, 4);
  combined << users, items;
  for (std::size_t g = 0; g < members.size(); ++g)
    for (Index c = 0; c < 4; ++c) {
      double lo = 1e300, hi = -1e300;
      for (Index m : members[g]) {
        lo = std::min(lo, combined(m, c));
        hi = std::max(hi, combined(m, c));
      }
      CHECK(tape.value(common)(static_cast<Index>(g), c) >= lo);
      CHECK(tape.value(common)(static_cast<Index>(g), c) <= hi);
    }
}

TEST_CASE("alignment_loss: literal loss with equal matched dots is |G| log |G|") {
  const Index n = 7;
  ad::Tape tape;
  // Any tables whose matched dot products are all equal.
  Mat consensus = Mat::Zero(n, 3);
  Mat common = Mat::Zero(n, 3);
  for (Index g = 0; g < n; ++g) {
    consensus(g, 0) = 2.0;
    common(g, 0) = 1.5;  // every matched dot = 3.0
  }
  const auto loss = alignment_loss(tape, tape.leaf(consensus),
                                   tape.leaf(common), 0.4,
                                   InfoNceMode::kLiteral);
  CHECK(tape.value(loss)(0, 0) ==
        doctest::Approx(n * std::log(static_cast<double>(n))).epsilon(1e-12));
}

TEST_CASE("alignment_loss: single group literal loss is zero") {
  ad::Tape tape;
  Mat a(1, 3), b(1, 3);
  a << 1, 2, 3;
  b << -1, 0.5, 2;
  const auto loss = alignment_loss(tape, tape.leaf(a), tape.leaf(b), 0.2,
                                   InfoNceMode::kLiteral);
  CHECK(tape.value(loss)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("alignment_loss: scaling tau and dots together leaves loss fixed") {
  Rng rng(23);
  const Mat a = random_mat(5, 3, rng), b = random_mat(5, 3, rng);
  for (const auto mode : {InfoNceMode::kLiteral, InfoNceMode::kCrossPair}) {
    ad::Tape t1, t2;
    const auto l1 =
        alignment_loss(t1, t1.leaf(a), t1.leaf(b), 0.3, mode);
    const auto l2 =
        alignment_loss(t2, t2.leaf(3.0 * a), t2.leaf(b), 0.9, mode);
    CHECK(t1.value(l1)(0, 0) ==
          doctest::Approx(t2.value(l2)(0, 0)).epsilon(1e-10));
  }
}

TEST_CASE("alignment_loss: literal mode is permutation invariant and >= 0") {
  Rng rng(29);
  const Mat a = random_mat(6, 4, rng), b = random_mat(6, 4, rng);
  std::vector<Index> perm{3, 0, 5, 1, 4, 2};
  Mat ap(6, 4), bp(6, 4);
  for (Index g = 0; g < 6; ++g) {
    ap.row(perm[g]) = a.row(g);
    bp.row(perm[g]) = b.row(g);
  }
  ad::Tape t1, t2;
  const auto l1 = alignment_loss(t1, t1.leaf(a), t1.leaf(b), 0.5,
                                 InfoNceMode::kLiteral);
  const auto l2 = alignment_loss(t2, t2.leaf(ap), t2.leaf(bp), 0.5,
                                 InfoNceMode::kLiteral);
  CHECK(t1.value(l1)(0, 0) ==
        doctest::Approx(t2.value(l2)(0, 0)).epsilon(1e-12));
  CHECK(t1.value(l1)(0, 0) >= 0.0);
}

TEST_CASE("consensus_gap: hand-evaluated distances") {
  Mat groups(2, 2), users(2, 2);

  SUBCASE("consensus equal to its single member gives zero gap") {
    groups << 1, 2, 0, 0;
    users << 1, 2, 5, 5;
    const auto gap = consensus_gap(groups, users, {{0}, {}});
    CHECK(gap.per_group[0] == doctest::Approx(0.0));
  }

  SUBCASE("members (3,4) and (0,0) around origin give gap 2.5") {
    groups << 0, 0, 0, 0;
    users << 3, 4, 0, 0;
    const auto gap = consensus_gap(groups, users, {{0, 1}});
    CHECK(gap.per_group[0] == doctest::Approx(2.5));
    CHECK(gap.mean == doctest::Approx(2.5));
  }

  SUBCASE("translation invariance") {
    Rng rng(31);
    const Mat g0 = random_mat(2, 2, rng), u0 = random_mat(2, 2, rng);
    const auto before = consensus_gap(g0, u0, {{0, 1}, {1}});
    Mat offset = Mat::Ones(1, 2) * 7.25;
    Mat g1 = g0, u1 = u0;
    g1.rowwise() += offset.row(0);
    u1.rowwise() += offset.row(0);
    const auto after = consensus_gap(g1, u1, {{0, 1}, {1}});
    CHECK(before.mean == doctest::Approx(after.mean).epsilon(1e-12));
  }
}
