#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "slottta/gradcheck.hpp"
#include "slottta/ops.hpp"
#include "slottta/registry.hpp"
#include "slottta/rng.hpp"
#include "slottta/slt_io.hpp"

using namespace slottta;
namespace op = slottta::ops;

namespace {

Tensor<double> random_tensor(Rng& rng, Shape s, double scale = 1.0) {
  Tensor<double> t = Tensor<double>::zeros(std::move(s));
  for (auto& v : t.data) v = rng.normal(0.0, scale);
  return t;
}

// Binds every registry entry as a leaf and returns the name->Var map.
std::map<std::string, Var> bind_all(Tape<double>& tape, const ParamRegistry<double>& reg) {
  std::map<std::string, Var> vars;
  for (const auto& e : reg.entries()) vars[e.name] = tape.leaf(e.tensor);
  return vars;
}

using Builder = std::function<Var(Tape<double>&, std::map<std::string, Var>&)>;

FdReport run_fd(const ParamRegistry<double>& reg, const Builder& build, double h = 1e-4) {
  auto value = [&](const ParamRegistry<double>& p) {
    Tape<double> tape;
    auto vars = bind_all(tape, p);
    return tape.value(build(tape, vars)).data[0];
  };
  auto analytic = [&](const ParamRegistry<double>& p) {
    Tape<double> tape;
    auto vars = bind_all(tape, p);
    tape.backward(build(tape, vars));
    std::map<std::string, Tensor<double>> grads;
    for (auto& [name, v] : vars) grads[name] = tape.grad(v);
    return grads;
  };
  return finite_difference_check(value, analytic, reg, h);
}

}  // namespace

TEST_CASE("matmul forward: identity and hand-checked product") {
  Tape<double> t;
  Var i2 = t.constant(Tensor<double>({2, 2}, {1, 0, 0, 1}));
  Var x = t.constant(Tensor<double>({2, 2}, {5, -3, 2, 7}));
  Var y = op::matmul(t, i2, x);
  CHECK(t.value(y).data == t.value(x).data);

  Var a = t.constant(Tensor<double>({2, 2}, {1, 2, 3, 4}));
  Var ones = t.constant(Tensor<double>({2, 1}, {1, 1}));
  Var p = op::matmul(t, a, ones);
  CHECK(t.value(p).data == std::vector<double>{3, 7});
}

TEST_CASE("matmul rejects mismatched inner dimensions naming both shapes") {
  Tape<double> t;
  Var a = t.constant(Tensor<double>::zeros({2, 3}));
  Var b = t.constant(Tensor<double>::zeros({4, 2}));
  CHECK_THROWS_WITH_AS(op::matmul(t, a, b),
                       doctest::Contains("[2x3]"), ShapeError);
}

TEST_CASE("matmul backward matches finite differences (random 3x4 * 4x2)") {
  Rng rng(42);
  ParamRegistry<double> reg;
  reg.add("a", ParamTag::encoder, random_tensor(rng, {3, 4}));
  reg.add("b", ParamTag::encoder, random_tensor(rng, {4, 2}));
  auto report = run_fd(reg, [](Tape<double>& t, std::map<std::string, Var>& v) {
    return op::mean_all(t, op::matmul(t, v["a"], v["b"]));
  });
  CHECK(report.pass(1e-4));
}

TEST_CASE("softmax closed forms and overflow safety") {
  Tape<double> t;
  Var a = t.constant(Tensor<double>({1, 2}, {0, 0}));
  auto ya = t.value(op::softmax_axis(t, a, 1)).data;
  CHECK(ya[0] == doctest::Approx(0.5).epsilon(1e-12));

  Var b = t.constant(Tensor<double>({1, 2}, {std::log(3.0), 0}));
  auto yb = t.value(op::softmax_axis(t, b, 1)).data;
  CHECK(yb[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(yb[1] == doctest::Approx(0.25).epsilon(1e-12));

  Var c = t.constant(Tensor<double>({1, 2}, {1000, 0}));
  auto yc = t.value(op::softmax_axis(t, c, 1)).data;
  CHECK(std::isfinite(yc[0]));
  CHECK(yc[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(yc[1] <= 1e-300);
}

TEST_CASE("softmax outputs positive and sum to one on random lanes") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 1 + static_cast<int>(rng.uniform_int(6));
    const int c = 2 + static_cast<int>(rng.uniform_int(7));
    Tape<float> t;
    Tensor<float> x = Tensor<float>::zeros({r, c});
    for (auto& v : x.data) v = static_cast<float>(rng.uniform(-30, 30));
    const int axis = static_cast<int>(rng.uniform_int(2));
    Var y = op::softmax_axis(t, t.constant(x), axis);
    const auto& yv = t.value(y);
    const int lanes = axis == 1 ? r : c;
    const int count = axis == 1 ? c : r;
    for (int lane = 0; lane < lanes; ++lane) {
      double s = 0;
      for (int i = 0; i < count; ++i) {
        const float e = axis == 1 ? yv.at(lane, i) : yv.at(i, lane);
        CHECK(e > 0.f);
        CHECK(e <= 1.f);
        s += e;
      }
      CHECK(std::abs(s - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("elementwise closed forms") {
  Tape<double> t;
  Var x = t.constant(Tensor<double>({1, 2}, {-1, 2}));
  auto r = t.value(op::relu(t, x)).data;
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);
  Var z = t.constant(Tensor<double>::scalar(0));
  CHECK(t.value(op::sigmoid(t, z)).data[0] == 0.5);
  CHECK(t.value(op::tanh_(t, z)).data[0] == 0.0);
}

TEST_CASE("sigmoid gradient at zero is 0.25 and matches finite differences") {
  ParamRegistry<double> reg;
  reg.add("x", ParamTag::encoder, Tensor<double>::scalar(0));
  Builder build = [](Tape<double>& t, std::map<std::string, Var>& v) {
    return op::sum_all(t, op::sigmoid(t, v["x"]));
  };
  Tape<double> tape;
  auto vars = bind_all(tape, reg);
  tape.backward(build(tape, vars));
  CHECK(tape.grad(vars["x"]).data[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(run_fd(reg, build).pass(1e-4));
}

TEST_CASE("binary elementwise ops reject shape mismatch") {
  Tape<double> t;
  Var a = t.constant(Tensor<double>::zeros({2, 3}));
  Var b = t.constant(Tensor<double>::zeros({3, 2}));
  CHECK_THROWS_AS(op::add(t, a, b), ShapeError);
  CHECK_THROWS_AS(op::mul(t, a, b), ShapeError);
  CHECK_THROWS_AS(op::sub(t, a, b), ShapeError);
}

TEST_CASE("layer_norm maps constant rows to bias and normalizes variance") {
  Tape<double> t;
  Var g = t.constant(Tensor<double>({4}, {1, 1, 1, 1}));
  Var b = t.constant(Tensor<double>({4}, {0, 0, 0, 0}));
  Var x = t.constant(Tensor<double>({1, 4}, {5, 5, 5, 5}));
  auto y = t.value(op::layer_norm(t, x, g, b)).data;
  for (double v : y) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));

  Var g2 = t.constant(Tensor<double>({2}, {1, 1}));
  Var b2 = t.constant(Tensor<double>({2}, {0, 0}));
  Var x2 = t.constant(Tensor<double>({1, 2}, {1, -1}));
  auto y2 = t.value(op::layer_norm(t, x2, g2, b2)).data;
  CHECK(y2[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(y2[1] == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("layer_norm backward matches finite differences (random 4x8)") {
  Rng rng(9);
  ParamRegistry<double> reg;
  reg.add("x", ParamTag::encoder, random_tensor(rng, {4, 8}));
  reg.add("g", ParamTag::norm, random_tensor(rng, {8}, 0.5));
  reg.add("b", ParamTag::norm, random_tensor(rng, {8}, 0.5));
  auto report = run_fd(reg, [](Tape<double>& t, std::map<std::string, Var>& v) {
    Var y = op::layer_norm(t, v["x"], v["g"], v["b"]);
    return op::mean_all(t, op::mul(t, y, y));
  });
  CHECK(report.pass(1e-4));
}

TEST_CASE("backward: d(x^2)/dx = 2x at x=3") {
  Tape<double> t;
  Tensor<double> xt = Tensor<double>::scalar(3);
  xt.requires_grad = true;
  Var x = t.leaf(xt);
  Var loss = op::sum_all(t, op::mul(t, x, x));
  t.backward(loss);
  CHECK(t.grad(x).data[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward: sum(softmax(x)) has zero gradient") {
  Rng rng(3);
  Tape<double> t;
  Tensor<double> xt = random_tensor(rng, {1, 5});
  xt.requires_grad = true;
  Var x = t.leaf(xt);
  t.backward(op::sum_all(t, op::softmax_axis(t, x, 1)));
  for (double g : t.grad(x).data) CHECK(std::abs(g) <= 1e-14);
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape<double> t;
  Tensor<double> xt = Tensor<double>::zeros({2, 2});
  xt.requires_grad = true;
  Var x = t.leaf(xt);
  CHECK_THROWS_AS(t.backward(x), ContractError);
}

TEST_CASE("shared subexpression accumulates both path gradients") {
  // loss = sum(x * x') where both factors are the same node, compared against
  // a duplicated-leaf construction.
  Tensor<double> xt({1, 3}, {1.5, -2.0, 0.5});
  xt.requires_grad = true;

  Tape<double> shared;
  Var xs = shared.leaf(xt);
  shared.backward(op::sum_all(shared, op::mul(shared, xs, xs)));

  Tape<double> dup;
  Var x1 = dup.leaf(xt);
  Var x2 = dup.leaf(xt);
  dup.backward(op::sum_all(dup, op::mul(dup, x1, x2)));

  for (int i = 0; i < 3; ++i) {
    const double expect = dup.grad(x1).data[i] + dup.grad(x2).data[i];
    CHECK(shared.grad(xs).data[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("two-layer MLP with MSE passes the finite-difference oracle") {
  Rng rng(21);
  ParamRegistry<double> reg;
  reg.add("w1", ParamTag::encoder, random_tensor(rng, {4, 6}, 0.7));
  reg.add("b1", ParamTag::encoder, random_tensor(rng, {1, 6}, 0.3));
  reg.add("w2", ParamTag::encoder, random_tensor(rng, {6, 2}, 0.7));
  reg.add("b2", ParamTag::encoder, random_tensor(rng, {1, 2}, 0.3));
  Tensor<double> input = random_tensor(rng, {5, 4});
  Tensor<double> target = random_tensor(rng, {5, 2});
  auto report = run_fd(reg, [&](Tape<double>& t, std::map<std::string, Var>& v) {
    Var x = t.constant(input);
    Var h = op::tanh_(t, op::add(t, op::matmul(t, x, v["w1"]), op::tile_rows(t, v["b1"], 5)));
    Var y = op::add(t, op::matmul(t, h, v["w2"]), op::tile_rows(t, v["b2"], 5));
    Var d = op::sub(t, y, t.constant(target));
    return op::mean_all(t, op::mul(t, d, d));
  });
  CHECK(report.pass(1e-4));
  CHECK(report.entries.size() == 4);
}

TEST_CASE("every differentiable op passes fd on random small shapes") {
  Rng rng(2024);
  int trials_per_op = 20;
  for (int trial = 0; trial < trials_per_op; ++trial) {
    const int r = 2 + static_cast<int>(rng.uniform_int(6));
    const int c = 2 + static_cast<int>(rng.uniform_int(6));
    ParamRegistry<double> reg;
    reg.add("x", ParamTag::encoder, random_tensor(rng, {r, c}));
    reg.add("y", ParamTag::encoder, random_tensor(rng, {r, c}));
    reg.add("m", ParamTag::encoder, random_tensor(rng, {c, r}));

    std::vector<Builder> builders;
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::matmul(t, v["x"], v["m"]));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::mul(t, v["x"], op::add(t, v["y"], v["x"])));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::div(t, v["x"], op::add_scalar(t, op::mul(t, v["y"], v["y"]), 1.0)));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::relu(t, op::sub(t, v["x"], v["y"])));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::sigmoid(t, op::softmax_axis(t, v["x"], 1)));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::mul(t, v["y"], op::log_softmax_axis(t, v["x"], 0)));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::tanh_(t, op::transpose(t, v["x"])));
    });
    builders.push_back([c](Tape<double>& t, std::map<std::string, Var>& v) {
      Var row = op::slice_rows(t, v["x"], 0, 1);
      return op::mean_all(t, op::mul(t, op::tile_rows(t, row, 3), op::tile_rows(t, row, 3)));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      Var col = op::slice_cols(t, v["x"], 1, 1);
      return op::mean_all(t, op::tile_cols(t, col, 4));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      Var cat = op::concat_rows(t, {v["x"], v["y"]});
      return op::mean_all(t, op::mul(t, cat, cat));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      Var cat = op::concat_cols(t, {v["x"], v["y"]});
      return op::mean_all(t, op::sigmoid(t, cat));
    });
    builders.push_back([](Tape<double>& t, std::map<std::string, Var>& v) {
      return op::mean_all(t, op::sum_axis0(t, op::mul(t, v["x"], v["x"])));
    });
    builders.push_back([r, c](Tape<double>& t, std::map<std::string, Var>& v) {
      Var flat = op::reshape(t, v["x"], {1, r * c});
      return op::mean_all(t, op::mul(t, flat, flat));
    });

    const auto& b = builders[trial % builders.size()];
    auto report = run_fd(reg, b);
    INFO("trial ", trial);
    CHECK(report.pass(1e-4));
  }
}

TEST_CASE("conv2d passes fd and shifts with padding") {
  Rng rng(77);
  const int h = 5, w = 4, cin = 2, cout = 3, k = 3;
  ParamRegistry<double> reg;
  reg.add("x", ParamTag::encoder, random_tensor(rng, {h * w, cin}));
  reg.add("w", ParamTag::encoder, random_tensor(rng, {k * k * cin, cout}, 0.5));
  reg.add("b", ParamTag::encoder, random_tensor(rng, {1, cout}, 0.2));
  auto report = run_fd(reg, [&](Tape<double>& t, std::map<std::string, Var>& v) {
    Var y = op::conv2d(t, v["x"], v["w"], v["b"], h, w, k);
    return op::mean_all(t, op::mul(t, y, y));
  });
  CHECK(report.pass(1e-4));
}

TEST_CASE("finite_difference_check: quadratic is exact to O(h^2)") {
  ParamRegistry<double> reg;
  reg.add("w", ParamTag::encoder, Tensor<double>({1, 3}, {1.0, -2.0, 3.0}));
  auto report = run_fd(reg, [](Tape<double>& t, std::map<std::string, Var>& v) {
    return op::sum_all(t, op::mul(t, v["w"], v["w"]));
  });
  CHECK(report.worst_rel <= 1e-9);
}

TEST_CASE("finite_difference_check flags a corrupted backward rule") {
  ParamRegistry<double> reg;
  reg.add("w", ParamTag::encoder, Tensor<double>({1, 2}, {0.7, -0.3}));
  auto value = [](const ParamRegistry<double>& p) {
    Tape<double> t;
    Var w = t.leaf(p.tensor("w"));
    return t.value(op::sum_all(t, op::mul(t, w, w))).data[0];
  };
  auto analytic = [](const ParamRegistry<double>& p) {
    Tape<double> t;
    Var w = t.leaf(p.tensor("w"));
    // y = w*w elementwise but with a wrong backward (dy passed through as-is)
    Tensor<double> y = Tensor<double>::zeros({1, 2});
    for (int i = 0; i < 2; ++i) y.data[i] = p.tensor("w").data[i] * p.tensor("w").data[i];
    Var bad = op::custom(t, std::move(y), true, [w](Tape<double>& tp, Var self) {
      const auto& dy = tp.grad_ref(self);
      auto& dw = tp.grad_buf(w);
      for (size_t i = 0; i < dy.size(); ++i) dw[i] += dy[i];
    });
    t.backward(op::sum_all(t, bad));
    std::map<std::string, Tensor<double>> grads;
    grads["w"] = t.grad(w);
    return grads;
  };
  auto report = finite_difference_check(value, analytic, reg, 1e-4);
  CHECK(!report.pass(1e-4));
}

TEST_CASE("finite_difference_check detects a non-deterministic objective") {
  ParamRegistry<double> reg;
  reg.add("w", ParamTag::encoder, Tensor<double>::scalar(1));
  int calls = 0;
  auto value = [&calls](const ParamRegistry<double>& p) {
    return p.tensor("w").data[0] + 1e-3 * (calls++);
  };
  auto analytic = [](const ParamRegistry<double>&) { return std::map<std::string, Tensor<double>>{}; };
  CHECK_THROWS_AS(finite_difference_check(value, analytic, reg, 1e-4), ContractError);
}

TEST_CASE("forward results are bit-identical for identical seed and inputs") {
  auto run = [] {
    Rng rng(123);
    Tape<float> t;
    Tensor<float> x = Tensor<float>::zeros({8, 8});
    for (auto& v : x.data) v = static_cast<float>(rng.normal());
    Var a = t.constant(x);
    Var y = op::softmax_axis(t, op::matmul(t, a, op::transpose(t, a)), 1);
    return t.value(y).data;
  };
  CHECK(run() == run());
}

TEST_CASE("eval-only tensors are rejected by guarded tapes") {
  Tensor<float> mask = Tensor<float>::zeros({2, 2});
  mask.eval_only = true;
  Tape<float> guarded;
  guarded.set_allow_eval_only(false);
  CHECK_THROWS_AS(guarded.constant(mask), ContractError);
  Tape<float> open;
  CHECK_NOTHROW(open.constant(mask));
}

TEST_CASE("checked mode flags non-finite forward values") {
  Tape<double> t;
  t.set_check_finite(true);
  Var x = t.constant(Tensor<double>({1, 2}, {1e308, 1e308}));
  CHECK_THROWS_AS(op::add(t, x, x), InputError);
}

TEST_CASE("SLT1 records round-trip bitwise and reject truncation") {
  Rng rng(55);
  Tensor<float> t32 = Tensor<float>::zeros({3, 4, 2});
  for (auto& v : t32.data) v = static_cast<float>(rng.normal());
  Tensor<double> t64 = Tensor<double>::zeros({7});
  for (auto& v : t64.data) v = rng.normal();

  std::ostringstream os;
  write_slt(os, t32);
  write_slt(os, t64);
  const std::string blob = os.str();

  std::istringstream is(blob);
  Tensor<float> r32 = read_slt_f32(is, "mem");
  Tensor<double> r64 = read_slt_f64(is, "mem");
  CHECK(at_eof(is));
  CHECK(r32.shape == t32.shape);
  CHECK(r32.data == t32.data);
  CHECK(r64.data == t64.data);

  std::istringstream trunc(blob.substr(0, blob.size() - 3));
  CHECK_NOTHROW(read_slt_f32(trunc, "mem"));
  CHECK_THROWS_AS(read_slt_f64(trunc, "mem"), FormatError);

  std::istringstream wrong(blob);
  CHECK_THROWS_AS(read_slt_f64(wrong, "mem"), FormatError);
}
