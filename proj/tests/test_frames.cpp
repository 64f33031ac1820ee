#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "tfcs/errors.hpp"
#include "tfcs/frames.hpp"
#include "tfcs/matrix_io.hpp"
#include "tfcs/rng.hpp"

using namespace tfcs;

namespace {

std::vector<TightFrame> sample_frames() {
  std::vector<TightFrame> out;
  out.push_back(make_identity_frame(5));
  out.push_back(make_dct_frame(7));
  out.push_back(make_union_frame(Matrix::Identity(4, 4), make_dct_frame(4).matrix()));
  out.push_back(make_random_tight_frame(6, 10, 3));
  out.push_back(make_random_tight_frame(8, 24, 4));
  return out;
}

Vector gaussian(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST(Frames, Identity) {
  const auto f = make_identity_frame(3);
  EXPECT_EQ(f.matrix(), Matrix::Identity(3, 3));
  EXPECT_EQ(verify_tight(f), 0.0);
  EXPECT_EQ(coherence(f), 0.0);
  const auto one = make_identity_frame(1);
  EXPECT_EQ(one.matrix()(0, 0), 1.0);
  EXPECT_TRUE(one.is_orthobasis());
}

TEST(Frames, Dct) {
  const auto f = make_dct_frame(2);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(f.matrix()(0, 0), r, 1e-15);
  EXPECT_NEAR(f.matrix()(1, 0), r, 1e-15);
  EXPECT_NEAR(f.matrix()(0, 1), r, 1e-15);
  EXPECT_NEAR(f.matrix()(1, 1), -r, 1e-15);
  for (int n : {1, 3, 8, 17, 64}) {
    const auto d = make_dct_frame(n);
    EXPECT_LE(verify_tight(d), 1e-10);
    EXPECT_LE((d.matrix().transpose() * d.matrix() - Matrix::Identity(n, n)).norm(), 1e-10);
    if (n > 1) {
      EXPECT_LE(coherence(d), 1e-10);
    }
  }
}

TEST(Frames, Union) {
  const auto dup = make_union_frame(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  EXPECT_EQ(dup.d(), 6);
  EXPECT_NEAR(coherence(dup), 1.0, 1e-15);
  const auto u = make_union_frame(Matrix::Identity(4, 4), make_dct_frame(4).matrix());
  EXPECT_LE(verify_tight(u), 1e-10);
  for (int k = 0; k < u.d(); ++k) EXPECT_NEAR(u.matrix().col(k).norm(), 1.0 / std::sqrt(2.0), 1e-15);
  const auto u2 = make_union_frame(Matrix::Identity(2, 2), make_dct_frame(2).matrix());
  EXPECT_NEAR(coherence(u2), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(make_union_frame(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)), ContractViolation);
}

TEST(Frames, RandomTight) {
  const auto f = make_random_tight_frame(4, 8, 1);
  EXPECT_LE(verify_tight(f), 1e-10);
  const auto sq = make_random_tight_frame(5, 5, 2);
  EXPECT_LE(coherence(sq), 1e-8);
  EXPECT_EQ(make_random_tight_frame(4, 8, 1).matrix(), f.matrix());
  EXPECT_NE(make_random_tight_frame(4, 8, 2).matrix(), f.matrix());
  EXPECT_THROW(make_random_tight_frame(5, 4, 1), ContractViolation);
}

TEST(Frames, VerifyTight) {
  Matrix padded = Matrix::Zero(2, 3);
  padded.leftCols(2) = Matrix::Identity(2, 2);
  const FrameCheck chk = verify_tight(padded);
  EXPECT_LE(chk.defect, 1e-15);
  EXPECT_FALSE(chk.columns_nonzero);
  EXPECT_FALSE(chk.tight());
  EXPECT_THROW(TightFrame{padded}, ContractViolation);

  EXPECT_NEAR(verify_tight(Matrix(2.0 * Matrix::Identity(3, 3))).defect, 3.0, 1e-14);
  EXPECT_THROW(TightFrame{Matrix(2.0 * Matrix::Identity(3, 3))}, ContractViolation);
}

TEST(Frames, CoherenceNeedsTwoColumns) {
  EXPECT_THROW(coherence(make_identity_frame(1)), ContractViolation);
}

TEST(Frames, CoherenceScaleInvariant) {
  const Matrix d = make_random_tight_frame(5, 9, 8).matrix();
  for (double c : {0.1, 2.0, 37.5}) EXPECT_NEAR(coherence(Matrix(c * d)), coherence(d), 1e-14);
}

TEST(Frames, AnalysisSynthesis) {
  const auto u = make_union_frame(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Vector f(2);
  f << std::sqrt(2.0), 0.0;
  const Vector x = u.analysis(f);
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_NEAR(x(1), 0.0, 1e-15);
  EXPECT_NEAR(x(2), 1.0, 1e-15);
  EXPECT_NEAR(x(3), 0.0, 1e-15);

  const auto id = make_identity_frame(3);
  const Vector v = Vector::LinSpaced(3, 1, 3);
  EXPECT_EQ(id.analysis(v), v);
  EXPECT_EQ(id.synthesize(v), v);

  const auto r = make_random_tight_frame(4, 7, 5);
  for (int k = 0; k < 7; ++k) EXPECT_EQ(r.synthesize(Vector::Unit(7, k)), Vector(r.matrix().col(k)));
  EXPECT_THROW(r.analysis(Vector::Ones(5)), ContractViolation);
  EXPECT_THROW(r.synthesize(Vector::Ones(4)), ContractViolation);
}

TEST(Frames, ParsevalAndReconstruction) {
  Rng rng = make_rng(2024);
  for (const auto& fr : sample_frames()) {
    for (int t = 0; t < 1000; ++t) {
      const Vector f = gaussian(fr.n(), rng);
      EXPECT_LE(std::abs(fr.analysis(f).norm() - f.norm()), 1e-8 * f.norm());
      EXPECT_LE((fr.synthesize(fr.analysis(f)) - f).norm(), 1e-8 * f.norm());
    }
  }
}

TEST(BestSTerm, Examples) {
  Vector x(3);
  x << 3, -1, 2;
  auto a = best_s_term(x, 2);
  EXPECT_EQ(a.x_best, Vector((Vector(3) << 3, 0, 2).finished()));
  EXPECT_EQ(a.tail_l1, 1.0);
  EXPECT_EQ(a.support, (Support{0, 2}));

  a = best_s_term(x, 0);
  EXPECT_EQ(a.x_best, Vector::Zero(3));
  EXPECT_EQ(a.tail_l1, 6.0);

  a = best_s_term(Vector::Ones(3), 2);
  EXPECT_EQ(a.support, (Support{0, 1}));
  EXPECT_EQ(a.tail_l1, 1.0);

  EXPECT_THROW(best_s_term(x, 4), ContractViolation);
  EXPECT_THROW(best_s_term(x, 1, 0.0), ContractViolation);
}

TEST(BestSTerm, TailLq) {
  Vector x(4);
  x << 4, 0.25, -0.25, 1;
  const auto a = best_s_term(x, 2, 0.5);
  // tail (0.25, 0.25): (0.5 + 0.5)^2 = 1
  EXPECT_NEAR(a.tail_lq, 1.0, 1e-15);
  EXPECT_NEAR(a.tail_l1, 0.5, 1e-15);
  EXPECT_NEAR(lq_power(x, 0.5), 2 + 0.5 + 0.5 + 1, 1e-14);
}

TEST(BestSTerm, Invariants) {
  Rng rng = make_rng(31);
  for (int t = 0; t < 200; ++t) {
    const int len = 1 + t % 12;
    Vector x = gaussian(len, rng);
    if (t % 3 == 0) x(t % len) = 0.0;
    for (int s = 0; s <= len; ++s) {
      const auto a = best_s_term(x, s);
      EXPECT_LE((a.x_best.array() != 0.0).count(), s);
      EXPECT_GE(a.tail_l1, 0.0);
      EXPECT_EQ(a.tail_l1 == 0.0, (x.array() != 0.0).count() <= s);
    }
  }
}

TEST(BestSTerm, OptimalOverAllSubsets) {
  Rng rng = make_rng(77);
  for (int len = 1; len <= 12; ++len) {
    const Vector x = gaussian(len, rng);
    for (int s = 0; s <= std::min(len, 4); ++s) {
      const double best = (x - best_s_term(x, s).x_best).norm();
      // every subset of size s via bitmask
      for (unsigned mask = 0; mask < (1u << len); ++mask) {
        if (__builtin_popcount(mask) != s) continue;
        Vector xs = Vector::Zero(len);
        for (int i = 0; i < len; ++i)
          if (mask & (1u << i)) xs(i) = x(i);
        EXPECT_LE(best, (x - xs).norm() + 1e-15);
      }
    }
  }
}

TEST(FrameFiles, RoundTrip) {
  const auto f = make_random_tight_frame(5, 9, 12);
  const auto path = std::filesystem::temp_directory_path() / "tfcs_frame_roundtrip.txt";
  save_frame(path, f);
  const auto g = load_frame(path);
  EXPECT_EQ(g.matrix(), f.matrix());
  std::filesystem::remove(path);
  EXPECT_THROW(load_frame("/nonexistent/dir/frame.txt"), IoError);
}

TEST(MatrixText, RejectsMalformed) {
  for (const char* bad : {"2 2\n1 2\n3\n", "2 2\n1 2\n3 nan\n", "1 1\n1 2\n", "x y\n", "2 1\n1\ninf\n"}) {
    std::istringstream ss(bad);
    EXPECT_THROW(io::read_matrix(ss), ContractViolation) << bad;
  }
  std::istringstream ok("2 3\n1 2 3\n4 5 6\n");
  const Matrix m = io::read_matrix(ok);
  EXPECT_EQ(m(1, 2), 6.0);
}
