// Python bindings for the core operations: packing, the XNOR convolution,
// ReAct activations, losses, OPs accounting and a small Network wrapper.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reactnet/activations.hpp"
#include "reactnet/arch.hpp"
#include "reactnet/bitkernel.hpp"
#include "reactnet/checkpoint.hpp"
#include "reactnet/gradcheck.hpp"
#include "reactnet/loss.hpp"
#include "reactnet/opscount.hpp"
#include "reactnet/train.hpp"

namespace py = pybind11;
using namespace reactnet;

namespace {

FloatTensor to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<int64_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<size_t>(i)] = a.shape(i);
    FloatTensor t(shape);
    std::copy(a.data(), a.data() + a.size(), t.data.begin());
    return t;
}

py::array_t<double> to_array(const FloatTensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<double> a(shape);
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "binary neural network engine core";

    m.def("binary_conv2d",
          [](py::array_t<double> x, py::array_t<double> w, int64_t stride, int64_t padding) {
              FloatTensor xt = to_tensor(x);
              FloatTensor wt = to_tensor(w);
              return to_array(binary_conv2d(pack(xt), BinaryConvParams::from_real(wt),
                                            stride, padding));
          },
          py::arg("x"), py::arg("weights"), py::arg("stride") = 1, py::arg("padding") = 1,
          "XNOR+popcount convolution; x must be +-1 valued, weights are real latents");

    m.def("compute_scale",
          [](py::array_t<double> w) { return compute_scale(to_tensor(w)); },
          "per-output-channel mean |w|");

    m.def("binarize_weights",
          [](py::array_t<double> w) { return to_array(binarize_weights(to_tensor(w))); });

    m.def("rsign",
          [](py::array_t<double> x, const std::vector<double>& alpha) {
              RSignParams p{alpha};
              return to_array(rsign_forward_pm1(to_tensor(x), p));
          },
          py::arg("x"), py::arg("alpha"));

    m.def("rsign_backward",
          [](py::array_t<double> x, const std::vector<double>& alpha,
             py::array_t<double> upstream) {
              RSignParams p{alpha};
              RSignGrads g = rsign_backward(to_tensor(x), p, to_tensor(upstream));
              return py::make_tuple(to_array(g.grad_x), g.grad_alpha);
          });

    m.def("rprelu",
          [](py::array_t<double> x, const std::vector<double>& beta,
             const std::vector<double>& gamma, const std::vector<double>& zeta) {
              RPReLUParams p{beta, gamma, zeta};
              return to_array(rprelu_forward(to_tensor(x), p));
          },
          py::arg("x"), py::arg("beta"), py::arg("gamma"), py::arg("zeta"));

    m.def("rprelu_backward",
          [](py::array_t<double> x, const std::vector<double>& beta,
             const std::vector<double>& gamma, const std::vector<double>& zeta,
             py::array_t<double> upstream) {
              RPReLUParams p{beta, gamma, zeta};
              RPReLUGrads g = rprelu_backward(to_tensor(x), p, to_tensor(upstream));
              return py::make_tuple(to_array(g.grad_x), g.grad_beta, g.grad_gamma,
                                    g.grad_zeta);
          });

    m.def("distributional_loss",
          [](py::array_t<double> logits, py::array_t<double> teacher) {
              return distributional_loss(to_tensor(logits), to_tensor(teacher));
          });
    m.def("distributional_loss_backward",
          [](py::array_t<double> logits, py::array_t<double> teacher) {
              return to_array(distributional_loss_backward(to_tensor(logits),
                                                           to_tensor(teacher)));
          });

    m.def("count_ops",
          [](const std::string& variant, int64_t input_size) {
              NetworkSpec spec =
                  build_network(variant, input_size <= 64 ? Scale::Desk : Scale::Paper);
              if (input_size > 0) {
                  spec.input_shape[1] = input_size;
                  spec.input_shape[2] = input_size;
              }
              OpsReport r = count_ops(spec);
              py::dict d;
              d["bops"] = r.total_bops;
              d["flops"] = r.total_flops;
              d["ops"] = r.total_ops;
              return d;
          },
          py::arg("variant"), py::arg("input_size") = 224);

    m.def("grad_check",
          [](uint64_t seed) {
              py::list out;
              for (const GradCheckResult& r : run_grad_checks(seed)) {
                  py::dict d;
                  d["name"] = r.name;
                  d["max_rel_err"] = r.max_rel_err;
                  d["tolerance"] = r.tolerance;
                  d["passed"] = r.passed;
                  out.append(d);
              }
              return out;
          },
          py::arg("seed") = 1);

    py::class_<Network>(m, "Network")
        .def(py::init([](const std::string& variant, const std::string& scale,
                         int64_t input_channels, int64_t num_classes, uint64_t seed) {
                 return Network(build_network(variant,
                                              scale == "desk" ? Scale::Desk : Scale::Paper,
                                              input_channels, num_classes),
                                seed);
             }),
             py::arg("variant"), py::arg("scale") = "desk", py::arg("input_channels") = -1,
             py::arg("num_classes") = -1, py::arg("seed") = 1)
        .def("forward",
             [](Network& n, py::array_t<double> x, bool training) {
                 return to_array(n.forward(to_tensor(x), training));
             },
             py::arg("x"), py::arg("training") = false)
        .def("set_binarize_weights", &Network::set_binarize_weights)
        .def("num_params", [](Network& n) {
            int64_t total = 0;
            for (const ParamRef& p : n.params())
                total += static_cast<int64_t>(p.value->size());
            return total;
        });

    m.def("load_network", [](const std::string& path) {
        return network_from_checkpoint(load_checkpoint(path));
    });
}
