#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "emccd/error.hpp"
#include "emccd/frameio.hpp"
#include "emccd/model.hpp"
#include "emccd/readout.hpp"
#include "emccd/source.hpp"

namespace py = pybind11;
using namespace emccd;

namespace {

py::array_t<std::uint32_t> stack_array(const FrameStack& s) {
  py::array_t<std::uint32_t> out({s.frames(), s.height(), s.width()});
  if (!s.data().empty()) std::memcpy(out.mutable_data(), s.data().data(), s.data().size_bytes());
  return out;
}

FrameStack to_stack(py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> a,
                    const std::string& kind) {
  if (a.ndim() != 3) throw py::value_error("expected an array of shape (frames, height, width)");
  const FrameKind k = kind == "counts"   ? FrameKind::counts
                      : kind == "clicks" ? FrameKind::clicks
                      : kind == "photoelectrons"
                          ? FrameKind::photoelectrons
                          : throw py::value_error("kind must be counts, clicks or photoelectrons");
  FrameStack s(static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(1)),
               static_cast<std::size_t>(a.shape(0)), k);
  if (a.size() > 0) std::memcpy(s.data().data(), a.data(), s.data().size_bytes());
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EMCCD detector model, twin-beam simulator and EMF1 frame files";

  py::register_exception<Error>(m, "EmccdError", PyExc_RuntimeError);

  py::class_<EmccdParams>(m, "EmccdParams")
      .def(py::init<>())
      .def(py::init([](double g, double g_sc, double p_sc, double mu, double sigma, double eta0) {
             EmccdParams p{g, g_sc, p_sc, mu, sigma, eta0};
             p.validate();
             return p;
           }),
           py::arg("g") = 147.0, py::arg("g_sc") = 141.0, py::arg("p_sc") = 0.0044,
           py::arg("mu") = 507.9, py::arg("sigma") = 24.88, py::arg("eta0") = 0.54)
      .def_readwrite("gain", &EmccdParams::gain)
      .def_readwrite("cic_gain", &EmccdParams::cic_gain)
      .def_readwrite("cic_prob", &EmccdParams::cic_prob)
      .def_readwrite("bias", &EmccdParams::bias)
      .def_readwrite("read_noise", &EmccdParams::read_noise)
      .def_readwrite("analog_efficiency", &EmccdParams::analog_efficiency)
      .def("validate", &EmccdParams::validate)
      .def("__repr__", [](const EmccdParams& p) {
        return "EmccdParams(g=" + std::to_string(p.gain) + ", g_sc=" + std::to_string(p.cic_gain) +
               ", p_sc=" + std::to_string(p.cic_prob) + ", mu=" + std::to_string(p.bias) +
               ", sigma=" + std::to_string(p.read_noise) +
               ", eta0=" + std::to_string(p.analog_efficiency) + ")";
      });

  m.def("em_gain_pdf", [](double x, int n, double g) { return em_gain_pdf(x, n, g).density; },
        py::arg("x"), py::arg("n"), py::arg("g"));
  m.def("read_noise_pdf", &read_noise_pdf, py::arg("x"), py::arg("mu"), py::arg("sigma"));
  m.def("noise_pdf", &noise_pdf, py::arg("x"), py::arg("params"));
  m.def("single_photon_response_pdf", &single_photon_response_pdf, py::arg("x"), py::arg("params"));
  m.def("noise_click_prob", [](double t, const EmccdParams& p) { return noise_click_prob({t}, p); },
        py::arg("t"), py::arg("params"));
  m.def("single_photon_tail", [](double t, const EmccdParams& p) { return single_photon_tail({t}, p); },
        py::arg("t"), py::arg("params"));
  m.def("eta_of_threshold", [](double t, const EmccdParams& p) { return eta_of_threshold({t}, p); },
        py::arg("t"), py::arg("params"));
  m.def("click_prob",
        [](double t, double p_ph, const EmccdParams& p) { return click_prob({t}, p_ph, p); },
        py::arg("t"), py::arg("photon_prob"), py::arg("params"));
  m.def("predicted_noise_click_rate",
        [](double t, const EmccdParams& p) { return predicted_noise_click_rate({t}, p); },
        py::arg("t"), py::arg("params"));
  m.def("predicted_efficiency",
        [](double t, const EmccdParams& p) { return predicted_efficiency({t}, p); }, py::arg("t"),
        py::arg("params"));
  m.def("theoretical_nrf", &theoretical_nrf, py::arg("eta"), py::arg("alpha"),
        py::arg("geometric_factor") = 1.0);

  m.def("render_dark_stack",
        [](std::size_t width, std::size_t height, std::size_t frames, const EmccdParams& p,
           std::uint64_t seed) { return stack_array(render_dark_stack(width, height, frames, p, seed)); },
        py::arg("width"), py::arg("height"), py::arg("frames"), py::arg("params"), py::arg("seed"));

  m.def("read_stack",
        [](const std::string& path) {
          const FrameStack s = read_stack(path);
          return py::make_tuple(stack_array(s), std::string(to_string(s.kind())));
        },
        py::arg("path"), "Returns (array of shape (frames, height, width), kind).");
  m.def("write_stack",
        [](const std::string& path, py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> a,
           const std::string& kind, std::uint64_t seed) { write_stack(to_stack(a, kind), path, {seed, "{}"}); },
        py::arg("path"), py::arg("frames"), py::arg("kind") = "counts", py::arg("seed") = 0);
}
