#include <doctest.h>

#include <numeric>

#include "vsr/stgcn.hpp"

using vsr::StgcnBlock;
using vsr::Tape;
using vsr::Tensor;
using vsr::Var;

namespace {

Tensor random_tensor(std::vector<int> shape, vsr::Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

vsr::kernels::SparseMatrix identity_adj(int n) {
  Tensor eye({n, n});
  for (int i = 0; i < n; ++i) eye.at({i, i}) = 1.0;
  return vsr::to_sparse(eye);
}

}  // namespace

TEST_CASE("degenerate block reduces to mish (+ residual)") {
  // identity adjacency, identity spatial weights, impulse temporal kernel
  const int nodes = 4, c = 3, frames = 5;
  vsr::Rng rng(9);
  StgcnBlock blk;
  blk.init(c, c, 3, rng);
  blk.w = Tensor({c, c});
  for (int i = 0; i < c; ++i) blk.w.at({i, i}) = 1.0;
  blk.b = Tensor({c});
  blk.tkernel = Tensor({3, c, c});
  for (int i = 0; i < c; ++i) blk.tkernel.at({1, i, i}) = 1.0;
  blk.tbias = Tensor({c});

  Tensor x = random_tensor({frames, nodes, c}, rng);
  auto adj = identity_adj(nodes);

  Tape t;
  Var in = t.constant(x);
  Var out = blk.apply(t, in, adj);
  Var expect = t.add(t.mish(t.constant(x)), t.constant(x));  // residual on
  for (int i = 0; i < t.val(out).size(); ++i)
    CHECK(t.val(out).data[i] ==
          doctest::Approx(t.val(expect).data[i]).epsilon(1e-12));
}

TEST_CASE("first-block shape contract: 2 -> 64 channels") {
  vsr::Rng rng(10);
  StgcnBlock blk;
  blk.init(2, 64, 5, rng);
  CHECK_FALSE(blk.residual);
  Tensor x = random_tensor({10, 117, 2}, rng);
  auto adj = vsr::to_sparse(
      vsr::build_lip_adjacency(vsr::canonical_lip_template(), 4).adjacency);
  Tape t;
  Var out = blk.apply(t, t.constant(x), adj);
  CHECK(t.val(out).shape == std::vector<int>{10, 117, 64});
}

TEST_CASE("block gradient passes finite differences") {
  vsr::Rng rng(11);
  StgcnBlock blk;
  blk.init(3, 3, 3, rng);
  Tensor x = random_tensor({4, 5, 3}, rng);
  // small random symmetric graph
  Tensor pts = random_tensor({5, 2}, rng);
  for (auto& v : pts.data) v = 0.5 + 0.4 * v;
  auto adj = vsr::to_sparse(vsr::build_lip_adjacency(pts, 2).adjacency);
  const double err = vsr::grad_check(
      [&](Tape& t) {
        return t.sum_all(blk.apply(t, t.leaf(&x), adj));
      },
      {&x, &blk.w, &blk.b, &blk.tkernel, &blk.tbias});
  CHECK(err <= 1e-5);
}

TEST_CASE("graph relabeling equivariance on a 5-node toy graph") {
  vsr::Rng rng(12);
  const int nodes = 5, c = 3, frames = 4;
  StgcnBlock blk;
  blk.init(c, c, 3, rng);

  Tensor pts = random_tensor({nodes, 2}, rng);
  for (auto& v : pts.data) v = 0.5 + 0.4 * v;
  vsr::LipGraph g = vsr::build_lip_adjacency(pts, 2);
  Tensor x = random_tensor({frames, nodes, c}, rng);

  std::vector<int> perm = {3, 0, 4, 1, 2};  // node i -> perm[i]

  // permuted input and permuted (dense) adjacency
  Tensor xp({frames, nodes, c});
  for (int f = 0; f < frames; ++f)
    for (int n = 0; n < nodes; ++n)
      for (int ch = 0; ch < c; ++ch)
        xp.at({f, perm[static_cast<std::size_t>(n)], ch}) = x.at({f, n, ch});
  Tensor ap({nodes, nodes});
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      ap.at({perm[static_cast<std::size_t>(i)],
             perm[static_cast<std::size_t>(j)]}) = g.adjacency.at({i, j});

  auto adj = vsr::to_sparse(g.adjacency);
  auto adjp = vsr::to_sparse(ap);

  Tape t1, t2;
  const Tensor& y = t1.val(blk.apply(t1, t1.constant(x), adj));
  const Tensor& yp = t2.val(blk.apply(t2, t2.constant(xp), adjp));
  for (int f = 0; f < frames; ++f)
    for (int n = 0; n < nodes; ++n)
      for (int ch = 0; ch < c; ++ch)
        CHECK(yp.at({f, perm[static_cast<std::size_t>(n)], ch}) ==
              doctest::Approx(y.at({f, n, ch})).epsilon(1e-10));
}

TEST_CASE("pasr encoder basic contracts") {
  vsr::PasrConfig cfg;
  cfg.channels = 6;
  cfg.blocks = 3;
  cfg.temporal_kernel = 3;
  cfg.d_enc = 8;
  cfg.encoder_layers = 1;
  cfg.heads = 2;
  cfg.ffn_hidden = 16;
  vsr::Rng rng(13);
  vsr::PasrEncoder enc(cfg, vsr::canonical_lip_template(), rng);

  // all-invalid, all-zero clip: finite output, no NaN
  vsr::LandmarkClip clip;
  clip.frames = Tensor({4, 117, 2});
  clip.valid.assign(4, false);
  Tape t;
  Var out = enc.encode(t, clip);
  CHECK(t.val(out).shape == std::vector<int>{4, 8});
  CHECK(t.val(out).all_finite());

  // doubling T doubles the output length
  vsr::LandmarkClip clip2;
  clip2.frames = Tensor({8, 117, 2});
  clip2.valid.assign(8, false);
  Tape t2;
  CHECK(t2.val(enc.encode(t2, clip2)).dim(0) == 8);

  // empty clip rejected
  vsr::LandmarkClip empty;
  empty.frames = Tensor();
  Tape t3;
  CHECK_THROWS_AS(enc.encode(t3, empty), vsr::EmptyClip);

  // zero-padding contract enforced
  vsr::LandmarkClip bad;
  bad.frames = Tensor({2, 117, 2});
  bad.frames.at({1, 3, 0}) = 0.4;
  bad.valid = {true, false};
  Tape t4;
  CHECK_THROWS_AS(enc.encode(t4, bad), vsr::Error);
}
