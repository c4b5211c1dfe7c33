#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uotkit/error.hpp"
#include "uotkit/matp.hpp"
#include "uotkit/metrics.hpp"

namespace py = pybind11;
using namespace uotkit;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using F32 = py::array_t<float, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

std::string shape_of(const py::array& a) {
    std::string s = "(";
    for (py::ssize_t i = 0; i < a.ndim(); ++i) {
        if (i) s += ", ";
        s += std::to_string(a.shape(i));
    }
    return s + (a.ndim() == 1 ? ",)" : ")");
}

// BoundingBox is four doubles, so an N x 4 C-contiguous array is viewed in place.
std::span<const BoundingBox> boxes_view(const F64& a, const char* name) {
    if (a.ndim() != 2 || a.shape(1) != 4) {
        throw Error(ErrorCode::kShapeMismatch, std::string(name) + " must have shape (N, 4), got " + shape_of(a));
    }
    static_assert(sizeof(BoundingBox) == 4 * sizeof(double));
    return {reinterpret_cast<const BoundingBox*>(a.data()), static_cast<std::size_t>(a.shape(0))};
}

py::dict py_evaluate(const F64& gt, const U8& absent, const F64& pred) {
    const auto g = boxes_view(gt, "gt_boxes");
    const auto p = boxes_view(pred, "pred_boxes");
    if (absent.ndim() != 1) {
        throw Error(ErrorCode::kShapeMismatch, "absent must have shape (N,), got " + shape_of(absent));
    }
    if (p.size() != g.size() || static_cast<std::size_t>(absent.shape(0)) != g.size()) {
        throw Error(ErrorCode::kShapeMismatch, "length mismatch: gt_boxes " + shape_of(gt) + ", absent " +
                                                   shape_of(absent) + ", pred_boxes " + shape_of(pred));
    }
    const TrackView view{g, {absent.data(), g.size()}, p, {}};
    Scores s;
    {
        py::gil_scoped_release release;
        s = evaluate_sequence(view).scores;
    }
    py::dict out;
    out["pre"] = s.pre;
    out["npre"] = s.npre;
    out["auc"] = s.auc;
    out["cauc"] = s.cauc;
    out["macc"] = s.macc;
    return out;
}

template <std::size_t N>
std::array<double, N> diagonal(const std::vector<double>& v, const char* name) {
    if (v.size() != N) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(name) + " needs " + std::to_string(N) + " entries, got " + std::to_string(v.size()));
    }
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

py::tuple py_matp_run(const F64& initial_box, const F32& maps, const F64& raw_boxes, std::size_t top_n,
                      double alpha, double conf, double threshold, double iou_threshold, double search_factor,
                      std::optional<std::vector<double>> init_covariance,
                      std::optional<std::vector<double>> process_noise,
                      std::optional<std::vector<double>> measurement_noise) {
    if (initial_box.ndim() != 1 || initial_box.shape(0) != 4) {
        throw Error(ErrorCode::kShapeMismatch, "initial_box must have shape (4,), got " + shape_of(initial_box));
    }
    const auto raw = boxes_view(raw_boxes, "raw_boxes");
    if (maps.ndim() != 3 || maps.shape(1) != maps.shape(2) ||
        static_cast<std::size_t>(maps.shape(0)) != raw.size()) {
        throw Error(ErrorCode::kShapeMismatch, "maps must have shape (T, n, n) with T = " + std::to_string(raw.size()) +
                                                   ", got " + shape_of(maps));
    }
    MatpConfig config;
    config.top_n = top_n;
    config.alpha = alpha;
    config.conf = conf;
    config.threshold = threshold;
    config.iou_threshold = iou_threshold;
    config.search_factor = search_factor;
    if (init_covariance) config.kalman.init_covariance = diagonal<7>(*init_covariance, "init_covariance");
    if (process_noise) config.kalman.process_noise = diagonal<7>(*process_noise, "process_noise");
    if (measurement_noise) config.kalman.measurement_noise = diagonal<4>(*measurement_noise, "measurement_noise");

    const BoundingBox init{initial_box.at(0), initial_box.at(1), initial_box.at(2), initial_box.at(3)};
    const std::size_t n = static_cast<std::size_t>(maps.shape(1));
    const std::span<const float> grid(maps.data(), static_cast<std::size_t>(maps.size()));
    MatpTrajectory traj;
    {
        py::gil_scoped_release release;
        traj = matp_run_anchored(init, grid, n, raw, config);
    }
    const auto rows = static_cast<py::ssize_t>(traj.boxes.size());
    py::array_t<double> boxes({rows, py::ssize_t{4}});
    std::memcpy(boxes.mutable_data(), traj.boxes.data(), traj.boxes.size() * sizeof(BoundingBox));
    py::array_t<bool> matched(rows);
    for (py::ssize_t i = 0; i < rows; ++i) matched.mutable_at(i) = traj.matched[static_cast<std::size_t>(i)] != 0;
    return py::make_tuple(boxes, matched);
}

}  // namespace

PYBIND11_MODULE(_uotkit, m) {
    m.doc() = "Native evaluation and motion-aware post-processing";
    m.attr("__version__") = UOTKIT_VERSION;
    static py::exception<Error> error(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("evaluate", &py_evaluate, py::arg("gt_boxes"), py::arg("absent"), py::arg("pred_boxes"),
          "Five scores for one sequence from N x 4 [x, y, w, h] boxes and an N absent flag vector.");

    const MatpConfig d;
    m.def("matp_run", &py_matp_run, py::arg("initial_box"), py::arg("maps"), py::arg("raw_boxes"), py::kw_only(),
          py::arg("top_n") = d.top_n, py::arg("alpha") = d.alpha, py::arg("conf") = d.conf,
          py::arg("threshold") = d.threshold, py::arg("iou_threshold") = d.iou_threshold,
          py::arg("search_factor") = d.search_factor, py::arg("init_covariance") = py::none(),
          py::arg("process_noise") = py::none(), py::arg("measurement_noise") = py::none(),
          "Runs the filter over T response maps (T x n x n) and raw boxes (T x 4). Returns the (T + 1) x 4 "
          "trajectory, whose first row is initial_box, and a per-row matched flag.");
}
