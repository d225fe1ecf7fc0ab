#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "memnav/errors.hpp"
#include "memnav/nn/checkpoint.hpp"
#include "memnav/nn/network.hpp"
#include "memnav/nn/rmsprop.hpp"
#include "memnav/presets.hpp"

using namespace memnav;
using namespace memnav::nn;

TEST_CASE("initialization is deterministic and follows the fan rule") {
  const Network net(fixture::toy_arch(ArchKind::DncLSTM));
  std::mt19937_64 a(3), b(3), c(4);
  const Vec ta = net.init_params(a), tb = net.init_params(b), tc = net.init_params(c);
  CHECK(ta == tb);
  CHECK(ta != tc);
  for (const ParamBlock& blk : net.layout().blocks()) {
    const auto seg = ta.segment(static_cast<Eigen::Index>(blk.offset), static_cast<Eigen::Index>(blk.size()));
    if (blk.init == ParamBlock::Init::Zero) CHECK(seg.cwiseAbs().maxCoeff() == 0.0);
    if (blk.init == ParamBlock::Init::Weight) {
      const double lim = std::sqrt(6.0 / (blk.fan_in + blk.fan_out));
      CHECK(seg.cwiseAbs().maxCoeff() <= lim);
    }
    if (blk.init == ParamBlock::Init::LstmBias) {
      const int h = blk.rows / 4;
      for (int i = 0; i < blk.rows; ++i) CHECK(seg[i] == (i >= h && i < 2 * h ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("views partition the parameter vector") {
  for (int k = 0; k < 4; ++k) {
    const Network net(fixture::toy_arch(static_cast<ArchKind>(k)));
    std::size_t at = 0;
    for (const ParamBlock& blk : net.layout().blocks()) {
      CHECK(blk.offset == at);
      at += blk.size();
    }
    CHECK(at == net.num_params());
  }
}

TEST_CASE("parameter counts match the closed-form layer sums") {
  const Preset p = preset_by_name("small");
  const ArchSpec ff = make_arch(p, ArchKind::FF, 0.0);
  CHECK(ff.input_dim == 145);
  CHECK(Network(ff).num_params() == 145u * 128 + 128 + 2 * (128u * 128 + 128) + 128u * 4 + 4);
  const ArchSpec ffp = make_arch(p, ArchKind::FF, 0.0, InputOptions{true});
  CHECK(ffp.input_dim == 149);
  CHECK(Network(ffp).num_params() == 149u * 128 + 128 + 2 * (128u * 128 + 128) + 128u * 4 + 4);
  const ArchSpec lstm = make_arch(p, ArchKind::LSTM, 0.0);
  CHECK(Network(lstm).num_params() ==
        145u * 128 + 128 + 128u * 128 + 128 + 4u * 128 * 128 * 2 + 4u * 128 + 128u * 4 + 4);
  CHECK(Network(lstm).num_params() == Network(make_arch(p, ArchKind::LSTM, 0.0)).num_params());
}

TEST_CASE("degenerate architectures are rejected") {
  ArchSpec a = fixture::toy_arch(ArchKind::FF);
  a.hidden_sizes.clear();
  CHECK_THROWS(Network(a));
  a = fixture::toy_arch(ArchKind::DncFF);
  a.memory.reset();
  CHECK_THROWS(Network(a));
  a = fixture::toy_arch(ArchKind::FF);
  a.mem_l2 = -1;
  CHECK_THROWS(Network(a));
}

TEST_CASE("wrong input length is a shape mismatch") {
  const Network net(fixture::toy_arch(ArchKind::LSTM));
  std::mt19937_64 rng(1);
  const Vec th = net.init_params(rng);
  MemoryState st = net.initial_state();
  CHECK_THROWS_AS(net.forward(th, Vec::Zero(5), st), ShapeMismatch);
  CHECK_THROWS_AS(net.forward(Vec::Zero(3), Vec::Zero(23), st), ShapeMismatch);
}

TEST_CASE("FF is memoryless") {
  const Network net(fixture::toy_arch(ArchKind::FF));
  std::mt19937_64 rng(2);
  const Vec th = net.init_params(rng);
  const Vec x = Vec::Random(23);
  MemoryState st = net.initial_state();
  PolicyOutput first;
  for (int t = 0; t < 80; ++t) {
    const PolicyOutput o = net.forward(th, t == 3 || t == 77 ? x : Vec::Random(23), st);
    if (t == 3) first = o;
    if (t == 77) {
      CHECK(o.logits == first.logits);
      CHECK(o.probs == first.probs);
      CHECK(o.psi == first.psi);
    }
  }
}

TEST_CASE("LSTM with zero parameters outputs uniform probabilities") {
  const Network net(fixture::toy_arch(ArchKind::LSTM));
  const Vec th = Vec::Zero(static_cast<Eigen::Index>(net.num_params()));
  MemoryState st = net.initial_state();
  for (int t = 0; t < 3; ++t) {
    const PolicyOutput o = net.forward(th, Vec::Random(23), st);
    for (int a = 0; a < 4; ++a) CHECK(o.probs[a] == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("recurrent kinds distinguish identical inputs at different times") {
  for (ArchKind k : {ArchKind::LSTM, ArchKind::DncFF, ArchKind::DncLSTM}) {
    const Network net(fixture::toy_arch(k));
    std::mt19937_64 rng(5);
    const Vec th = net.init_params(rng);
    const Vec x = Vec::Random(23);
    MemoryState st = net.initial_state();
    const PolicyOutput a = net.forward(th, x, st);
    net.forward(th, Vec::Random(23), st);
    const PolicyOutput b = net.forward(th, x, st);
    CHECK((a.psi - b.psi).norm() > 1e-9);
  }
}

TEST_CASE("softmax output invariants") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 30);
  for (int t = 0; t < 1000; ++t) {
    Vec z(4);
    for (int i = 0; i < 4; ++i) z[i] = n(rng);
    const Vec p = softmax(z);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(argmax(p) == argmax(z));
  }
  for (int k = 0; k < 4; ++k) {
    const Network net(fixture::toy_arch(static_cast<ArchKind>(k)));
    std::mt19937_64 r(k);
    const Vec th = net.init_params(r);
    MemoryState st = net.initial_state();
    const PolicyOutput o = net.forward(th, Vec::Random(23), st);
    CHECK(std::abs(o.probs.sum() - 1.0) <= 1e-9);
    const auto& blk = net.layout().block("readout.w");
    const Eigen::Map<const Mat> A(th.data() + blk.offset, blk.rows, blk.cols);
    const Vec b = th.segment(static_cast<Eigen::Index>(net.layout().block("readout.b").offset), 4);
    CHECK((A * o.psi + b - o.logits).norm() < 1e-12);
    CHECK(o.psi.size() == net.arch().feature_dim());
  }
}

TEST_CASE("loss examples") {
  const Network net(fixture::toy_arch(ArchKind::FF, false, 0.0));
  const Vec th = Vec::Zero(static_cast<Eigen::Index>(net.num_params()));
  PolicyOutput uniform;
  uniform.logits = Vec::Zero(4);
  uniform.probs = Vec::Constant(4, 0.25);
  CHECK(net.loss({uniform, uniform}, {Action::Up, Action::Left}, th) == doctest::Approx(std::log(4.0)));
  PolicyOutput sure;
  sure.logits = Vec::Zero(4);
  sure.logits[1] = 800;
  CHECK(net.loss({sure}, {Action::Right}, th) == doctest::Approx(0.0));
  CHECK(cross_entropy(uniform.logits, Action::Down) == doctest::Approx(std::log(4.0)));

  // mem_l2 0.1 with |theta_mem|^2 = 2 adds exactly 0.1.
  const Network reg(fixture::toy_arch(ArchKind::LSTM, false, 0.1));
  Vec t2 = Vec::Zero(static_cast<Eigen::Index>(reg.num_params()));
  const ParamBlock& m = reg.layout().block("lstm1.u");
  REQUIRE(m.memory);
  t2[static_cast<Eigen::Index>(m.offset)] = 1.0;
  t2[static_cast<Eigen::Index>(m.offset) + 1] = -1.0;
  t2[static_cast<Eigen::Index>(reg.layout().block("readout.w").offset)] = 5.0;  // not regularized
  CHECK(reg.loss({sure}, {Action::Right}, t2) == doctest::Approx(0.1));
}

TEST_CASE("memory view covers LSTM and DNC interface blocks only") {
  const Network net(fixture::toy_arch(ArchKind::DncLSTM));
  for (const ParamBlock& b : net.layout().blocks()) {
    const bool expect = b.name.rfind("lstm", 0) == 0 || b.name.rfind("iface", 0) == 0 ||
                        b.name.find("w_read") != std::string::npos;
    CHECK_MESSAGE(b.memory == expect, b.name);
  }
}

TEST_CASE("backward matches finite differences on small nets") {
  for (int k = 0; k < 4; ++k) {
    for (bool conv : {false, true}) {
      const Network net(fixture::toy_arch(static_cast<ArchKind>(k), conv));
      std::mt19937_64 rng(100 + k);
      Vec th = net.init_params(rng);
      th += 0.3 * Vec::Random(th.size());
      const auto w = fixture::random_window(net, th, rng);
      const auto gc = fixture::grad_check(net, th, w, 25, rng);
      CHECK_MESSAGE(gc.worst < 1e-4, to_string(static_cast<ArchKind>(k)));
      CHECK(net.replay_loss(th, w.traces, w.labels) ==
            doctest::Approx(net.loss_from_traces(w.traces, w.labels, th)).epsilon(1e-12));
    }
  }
}

TEST_CASE("one-layer LSTM over a five step window matches finite differences") {
  ArchSpec a;
  a.kind = ArchKind::LSTM;
  a.input_dim = 6;
  a.hidden_sizes = {8};
  const Network net(a);
  std::mt19937_64 rng(9);
  const Vec th = net.init_params(rng);
  const auto w = fixture::random_window(net, th, rng, 2, 5);
  CHECK(fixture::grad_check(net, th, w, static_cast<int>(th.size()), rng).worst < 1e-4);
}

TEST_CASE("negative gradient is a descent direction") {
  int pass = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Network net(fixture::toy_arch(static_cast<ArchKind>(trial % 4), false));
    std::mt19937_64 rng(1000 + trial);
    const Vec th = net.init_params(rng);
    const auto w = fixture::random_window(net, th, rng);
    const Vec g = net.backward(th, w.traces, w.labels);
    const double eta = 1e-4 / std::max(1.0, g.norm());
    pass += net.replay_loss(th - eta * g, w.traces, w.labels) < net.replay_loss(th, w.traces, w.labels);
  }
  CHECK(pass >= 99);
}

TEST_CASE("windows longer than the truncation length are rejected") {
  const Network net(fixture::toy_arch(ArchKind::LSTM, false));
  std::mt19937_64 rng(1);
  const Vec th = net.init_params(rng);
  const auto w = fixture::random_window(net, th, rng, 0, 6);
  CHECK_THROWS(net.backward(th, w.traces, w.labels));
}

TEST_CASE("rmsprop update rules") {
  RmsPropConfig cfg;
  CHECK(cfg.lr == 1e-4);
  CHECK(cfg.rho == 0.9);
  CHECK(cfg.eps == 1e-8);
  Vec th = Vec::Random(5);
  const Vec before = th;
  RmsPropState st = rmsprop_init(5);
  rmsprop_update(st, th, Vec::Zero(5), cfg);
  CHECK(th == before);
  const Vec g = Vec::Constant(5, 0.37);
  Vec step;
  for (int i = 0; i < 400; ++i) {
    const Vec prev = th;
    rmsprop_update(st, th, g, cfg);
    step = prev - th;
  }
  for (int i = 0; i < 5; ++i) CHECK(step[i] == doctest::Approx(cfg.lr).epsilon(1e-6));
  // First step from zero state moves lr / sqrt(1 - rho).
  Vec t1 = Vec::Zero(1);
  RmsPropState s1 = rmsprop_init(1);
  rmsprop_update(s1, t1, Vec::Constant(1, 2.0), cfg);
  CHECK(-t1[0] == doctest::Approx(cfg.lr * 2.0 / (std::sqrt(0.1 * 4.0) + cfg.eps)));
  CHECK_THROWS_AS(rmsprop_update(s1, t1, Vec::Zero(3), cfg), ShapeMismatch);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const Network net(fixture::toy_arch(ArchKind::DncLSTM));
  std::mt19937_64 rng(77);
  Checkpoint ck;
  ck.arch = net.arch();
  ck.theta = net.init_params(rng);
  ck.theta[0] = 1.0 / 3.0;
  ck.optimizer_state = rmsprop_init(net.num_params());
  rmsprop_update(ck.optimizer_state, ck.theta, Vec::Random(ck.theta.size()), ck.optimizer);
  ck.updates = 12345;
  ck.seed = 0xdeadbeefcafef00dULL;
  ck.meta["preset"] = "desk";
  const std::string text = checkpoint_to_json(ck);
  const Checkpoint back = checkpoint_from_json(text);
  CHECK(back.arch == ck.arch);
  CHECK(back.theta == ck.theta);
  CHECK(back.optimizer_state == ck.optimizer_state);
  CHECK(back.optimizer == ck.optimizer);
  CHECK(back.updates == ck.updates);
  CHECK(back.seed == ck.seed);
  CHECK(back.meta == ck.meta);
  CHECK(checkpoint_to_json(back) == text);
  CHECK_THROWS_AS(checkpoint_from_json("{}"), ParseError);
  CHECK_THROWS_AS(checkpoint_from_json("not json"), ParseError);
}
