// Python bindings. Volumes cross the boundary as C-contiguous numpy arrays
// shaped (frames, height, width[, channels]).
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "salgraph/error.hpp"
#include "salgraph/evaluation.hpp"
#include "salgraph/features.hpp"
#include "salgraph/fusion.hpp"
#include "salgraph/pipeline.hpp"
#include "salgraph/propagation.hpp"
#include "salgraph/saliency_graph.hpp"
#include "salgraph/supervoxel.hpp"
#include "salgraph/synthetic.hpp"
#include "salgraph/video_volume.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace salgraph;

namespace {

template <typename T>
using CArray = py::array_t<T, py::array::c_style | py::array::forcecast>;

Dims dims_of(const py::buffer_info& b, int min_nd, int max_nd, const char* what) {
  if (b.ndim < min_nd || b.ndim > max_nd)
    throw DataError(std::string(what) + ": expected a (frames, height, width" +
                    (max_nd == 4 ? "[, channels])" : ")") + " array");
  return {static_cast<std::size_t>(b.shape[1]), static_cast<std::size_t>(b.shape[2]),
          static_cast<std::size_t>(b.shape[0])};
}

std::vector<py::ssize_t> shape_of(const Dims& d) {
  return {static_cast<py::ssize_t>(d.frames), static_cast<py::ssize_t>(d.height),
          static_cast<py::ssize_t>(d.width)};
}

VideoVolume to_volume(const CArray<float>& a, ColorSpace space) {
  const auto b = a.request();
  const Dims d = dims_of(b, 4, 4, "volume");
  if (b.shape[3] != 3) throw DataError("volume: expected 3 channels");
  VideoVolume v(d, 3, space);
  std::memcpy(v.data().data(), b.ptr, v.data().size() * sizeof(float));
  return v;
}

py::array_t<float> from_volume(const VideoVolume& v) {
  auto shape = shape_of(v.dims());
  shape.push_back(static_cast<py::ssize_t>(v.channels()));
  py::array_t<float> out(shape);
  std::memcpy(out.mutable_data(), v.data().data(), v.data().size() * sizeof(float));
  return out;
}

FeatureTensor to_tensor(const CArray<float>& a) {
  const auto b = a.request();
  const Dims d = dims_of(b, 3, 4, "tensor");
  const std::size_t c = b.ndim == 4 ? static_cast<std::size_t>(b.shape[3]) : 1;
  const auto* p = static_cast<const float*>(b.ptr);
  return FeatureTensor(d, c, std::vector<float>(p, p + d.voxels() * c));
}

py::array_t<float> from_tensor(const FeatureTensor& t) {
  auto shape = shape_of(t.dims());
  shape.push_back(static_cast<py::ssize_t>(t.channels()));
  py::array_t<float> out(shape);
  std::memcpy(out.mutable_data(), t.values().data(), t.values().size() * sizeof(float));
  return out;
}

LabelVolume to_labels(const CArray<std::uint32_t>& a) {
  const auto b = a.request();
  const Dims d = dims_of(b, 3, 3, "labels");
  const auto* p = static_cast<const std::uint32_t*>(b.ptr);
  return make_dense(d, std::vector<std::uint32_t>(p, p + d.voxels()));
}

py::array_t<std::uint32_t> from_labels(const LabelVolume& l) {
  py::array_t<std::uint32_t> out(shape_of(l.dims()));
  std::memcpy(out.mutable_data(), l.labels().data(), l.labels().size() * sizeof(std::uint32_t));
  return out;
}

SaliencyMap to_map(const CArray<float>& a) {
  const auto b = a.request();
  const Dims d = dims_of(b, 3, 3, "map");
  const auto* p = static_cast<const float*>(b.ptr);
  return {d, std::vector<float>(p, p + d.voxels())};
}

py::array_t<float> from_map(const SaliencyMap& m) {
  py::array_t<float> out(shape_of(m.dims));
  std::memcpy(out.mutable_data(), m.values.data(), m.values.size() * sizeof(float));
  return out;
}

GroundTruthMasks to_gt(const py::array& a) {
  const auto m = to_map(a.cast<CArray<float>>());
  GroundTruthMasks gt{m.dims, std::vector<std::uint8_t>(m.values.size())};
  for (std::size_t i = 0; i < gt.mask.size(); ++i) gt.mask[i] = m.values[i] != 0.0f;
  return gt;
}

std::vector<UnitEdge> to_edges(const CArray<std::int64_t>& a) {
  const auto b = a.request();
  if (b.ndim != 2 || (b.shape[0] > 0 && b.shape[1] != 2))
    throw DataError("edges: expected an (E, 2) array");
  const auto* p = static_cast<const std::int64_t*>(b.ptr);
  std::vector<UnitEdge> edges(static_cast<std::size_t>(b.shape[0]));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto i = p[2 * e], j = p[2 * e + 1];
    if (i < 0 || j < 0) throw DataError("edges: negative node index");
    if (i > j) std::swap(i, j);
    edges[e] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
  }
  return edges;
}

py::array_t<std::int64_t> from_edges(const std::vector<UnitEdge>& edges) {
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(edges.size()), py::ssize_t{2}});
  auto r = out.mutable_unchecked<2>();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    r(e, 0) = edges[e].first;
    r(e, 1) = edges[e].second;
  }
  return out;
}

Eigen::VectorXd to_vector(const CArray<double>& a) {
  const auto b = a.request();
  if (b.ndim != 1) throw DataError("expected a 1-D array");
  return Eigen::Map<const Eigen::VectorXd>(static_cast<const double*>(b.ptr), b.shape[0]);
}

py::array_t<double> from_vector(const Eigen::VectorXd& v) {
  py::array_t<double> out(v.size());
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

SolverKind solver_from(const std::string& s) {
  if (s == "direct") return SolverKind::kDirect;
  if (s == "iterative") return SolverKind::kIterative;
  throw ConfigError("solver must be 'direct' or 'iterative', got '" + s + "'");
}

SaliencyGraph make_graph(std::size_t n, const CArray<std::int64_t>& edges,
                         const CArray<double>& weights) {
  const auto w = to_vector(weights);
  return graph_from_weights(n, to_edges(edges), std::vector<double>(w.data(), w.data() + w.size()));
}

}  // namespace

PYBIND11_MODULE(_salgraph, m) {
  m.doc() = "Video saliency by manifold ranking over supervoxel graphs";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", base.ptr());

  // -- volumes ---------------------------------------------------------------
  m.def(
      "load_frames",
      [](const fs::path& dir, const std::string& pattern) {
        return from_volume(load_frame_sequence(dir, pattern));
      },
      py::arg("directory"), py::arg("pattern") = "*.png",
      "Natural-sorted frames as float32 RGB in [0, 1], shape (t, m, n, 3).");
  m.def(
      "load_ground_truth",
      [](const fs::path& dir, std::tuple<std::size_t, std::size_t, std::size_t> shape,
         const std::string& pattern) {
        const auto [t, h, w] = shape;
        const auto gt = load_ground_truth(dir, Dims{h, w, t}, pattern);
        py::array_t<bool> out(shape_of(gt.dims));
        std::copy(gt.mask.begin(), gt.mask.end(), out.mutable_data());
        return out;
      },
      py::arg("directory"), py::arg("shape"), py::arg("pattern") = "*.png");
  m.def(
      "rgb_to_lab", [](const CArray<float>& rgb) {
        return from_volume(rgb_to_lab(to_volume(rgb, ColorSpace::kRgb)));
      },
      py::arg("rgb"));

  // -- segmentation ------------------------------------------------------------
  m.def(
      "segment_video",
      [](const CArray<float>& lab, double k, std::size_t min_size, std::size_t levels,
         int connectivity) {
        const auto volume = to_volume(lab, ColorSpace::kLab);
        SupervoxelHierarchy h = [&] {
          py::gil_scoped_release nogil;
          return segment_video(volume, {k, min_size}, levels, connectivity_from_int(connectivity));
        }();
        py::list layers;
        for (const auto& layer : h.layers()) layers.append(from_labels(layer));
        return layers;
      },
      py::arg("lab"), py::arg("k") = 8.0, py::arg("min_size") = 100, py::arg("levels") = 10,
      py::arg("connectivity") = 6, "Label volumes, finest layer first.");
  m.def("read_lvol", [](const fs::path& p) { return from_labels(read_lvol(p)); }, py::arg("path"));
  m.def(
      "write_lvol",
      [](const fs::path& p, const CArray<std::uint32_t>& labels) { write_lvol(p, to_labels(labels)); },
      py::arg("path"), py::arg("labels"));

  // -- features ----------------------------------------------------------------
  m.def("read_fvol", [](const fs::path& p) { return from_tensor(read_fvol(p)); }, py::arg("path"));
  m.def(
      "write_fvol",
      [](const fs::path& p, const CArray<float>& t) { write_fvol(p, to_tensor(t)); },
      py::arg("path"), py::arg("tensor"));
  m.def(
      "pool_features",
      [](const CArray<float>& tensor, const CArray<std::uint32_t>& labels) {
        const auto table = pool_unit_features(to_tensor(tensor), to_labels(labels));
        py::array_t<double> out({static_cast<py::ssize_t>(table.units),
                                 static_cast<py::ssize_t>(table.channels)});
        std::memcpy(out.mutable_data(), table.values.data(), table.values.size() * sizeof(double));
        return out;
      },
      py::arg("tensor"), py::arg("labels"),
      "Per-unit descriptors: frame-wise max, then mean over the unit's frames.");

  // -- graph -------------------------------------------------------------------
  m.def(
      "adjacency",
      [](const CArray<std::uint32_t>& labels, int connectivity) {
        return from_edges(compute_adjacency(to_labels(labels), connectivity_from_int(connectivity)));
      },
      py::arg("labels"), py::arg("connectivity") = 6);
  m.def(
      "affinity_weights",
      [](const CArray<double>& features, const CArray<std::int64_t>& edges, double rho,
         bool per_channel) {
        const auto b = features.request();
        if (b.ndim != 2) throw DataError("features: expected a (units, channels) array");
        UnitFeatureTable table;
        table.units = static_cast<std::size_t>(b.shape[0]);
        table.channels = static_cast<std::size_t>(b.shape[1]);
        const auto* p = static_cast<const double*>(b.ptr);
        table.values.assign(p, p + table.units * table.channels);
        const auto e = to_edges(edges);
        const auto g = build_affinity(table, e, {rho, per_channel});
        py::array_t<double> w(static_cast<py::ssize_t>(e.size()));
        auto r = w.mutable_unchecked<1>();
        for (std::size_t i = 0; i < e.size(); ++i) r(i) = g.affinity.coeff(e[i].first, e[i].second);
        return w;
      },
      py::arg("features"), py::arg("edges"), py::arg("rho") = 0.1, py::arg("per_channel") = false,
      "RBF weight for each edge row.");

  // -- propagation -------------------------------------------------------------
  m.def(
      "compute_seed",
      [](const CArray<float>& lab, const CArray<std::uint32_t>& labels) {
        const auto s = compute_seed(to_volume(lab, ColorSpace::kLab), to_labels(labels));
        return py::make_tuple(from_vector(s.q), s.empty, s.single_frame);
      },
      py::arg("lab"), py::arg("labels"), "Returns (q, empty, single_frame).");
  m.def(
      "solve",
      [](std::size_t n, const CArray<std::int64_t>& edges, const CArray<double>& weights,
         const CArray<double>& q, double mu, const std::string& solver, double tol,
         std::size_t max_iter) {
        const auto graph = make_graph(n, edges, weights);
        const auto qv = to_vector(q);
        PropagationConfig cfg;
        cfg.mu = mu;
        cfg.solver = solver_from(solver);
        cfg.iter_tol = tol;
        cfg.max_iter = max_iter;
        const auto s = [&] {
          py::gil_scoped_release nogil;
          return solve_closed_form(graph, qv, cfg);
        }();
        return from_vector(s.g);
      },
      py::arg("n"), py::arg("edges"), py::arg("weights"), py::arg("q"), py::arg("mu") = 0.1,
      py::arg("solver") = "direct", py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
      "Closed-form ranking scores g = (I - S/(1+mu))^-1 q.");
  m.def(
      "stationarity_residual",
      [](std::size_t n, const CArray<std::int64_t>& edges, const CArray<double>& weights,
         const CArray<double>& q, const CArray<double>& h, double mu) {
        return stationarity_residual_at(make_graph(n, edges, weights), to_vector(q), mu,
                                        to_vector(h));
      },
      py::arg("n"), py::arg("edges"), py::arg("weights"), py::arg("q"), py::arg("h"),
      py::arg("mu") = 0.1, "Max-norm energy gradient at h over non-isolated nodes.");

  // -- maps and metrics --------------------------------------------------------
  m.def(
      "fuse_maps",
      [](const CArray<float>& lab, const CArray<float>& deep, double beta) {
        return from_map(fuse_maps(to_map(lab), to_map(deep), {beta}));
      },
      py::arg("lab"), py::arg("deep"), py::arg("beta") = 0.7);
  m.def(
      "normalize_map", [](const CArray<float>& map) { return from_map(normalize_map(to_map(map))); },
      py::arg("map"));
  m.def(
      "roc_auc",
      [](const CArray<float>& map, const py::array& gt) {
        const auto roc = roc_auc(to_map(map), to_gt(gt));
        py::array_t<double> fpr(static_cast<py::ssize_t>(roc.points.size()));
        py::array_t<double> tpr(static_cast<py::ssize_t>(roc.points.size()));
        for (std::size_t i = 0; i < roc.points.size(); ++i) {
          fpr.mutable_at(i) = roc.points[i].fpr;
          tpr.mutable_at(i) = roc.points[i].tpr;
        }
        return py::make_tuple(roc.auc, fpr, tpr);
      },
      py::arg("map"), py::arg("gt"), "Returns (auc, fpr, tpr).");
  m.def(
      "nss", [](const CArray<float>& map, const py::array& gt) { return nss(to_map(map), to_gt(gt)); },
      py::arg("map"), py::arg("gt"));

  // -- pipeline ----------------------------------------------------------------
  m.def(
      "run_pipeline",
      [](const std::map<std::string, std::string>& options) {
        const ConfigPairs pairs(options.begin(), options.end());
        const auto cfg = apply_config({}, pairs);
        py::gil_scoped_release nogil;
        return run_pipeline(cfg).to_json();
      },
      py::arg("options"), "Runs every stage; returns the manifest as JSON text.");
  m.def(
      "write_synthetic_clip",
      [](const fs::path& frames_dir, const fs::path& gt_dir,
         std::tuple<std::size_t, std::size_t, std::size_t> shape, std::size_t side) {
        const auto [t, h, w] = shape;
        write_clip(moving_square_clip({h, w, t}, side), frames_dir, gt_dir);
      },
      py::arg("frames_dir"), py::arg("gt_dir"), py::arg("shape") = std::make_tuple(16, 32, 32),
      py::arg("side") = 8, "Bright square drifting over a textured background, with masks.");
}
