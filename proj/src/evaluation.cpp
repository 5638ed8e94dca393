#include "salgraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "salgraph/error.hpp"

namespace salgraph {

namespace {

void check_pair(const SaliencyMap& map, const GroundTruthMasks& gt) {
  if (map.dims != gt.dims || map.values.size() != gt.mask.size())
    throw DataError("map " + to_string(map.dims) + " and ground truth " + to_string(gt.dims) +
                    " differ in size");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot open " + path.string());
  return os;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

RocCurve roc_auc(const SaliencyMap& map, const GroundTruthMasks& gt, std::size_t begin,
                 std::size_t end) {
  check_pair(map, gt);
  constexpr std::size_t kLast = kRocThresholds - 1;  // 256
  // passes[k]: voxels with map >= k/256. Scaling by 256 and flooring is exact.
  std::vector<std::size_t> pos_at(kRocThresholds, 0), neg_at(kRocThresholds, 0);
  RocCurve roc;
  for (std::size_t i = begin; i < end; ++i) {
    const double v = std::clamp(static_cast<double>(map.values[i]), 0.0, 1.0);
    const auto top = static_cast<std::size_t>(std::floor(v * static_cast<double>(kLast)));
    if (gt.mask[i]) {
      ++pos_at[top];
      ++roc.n_pos;
    } else {
      ++neg_at[top];
      ++roc.n_neg;
    }
  }
  if (roc.n_pos == 0 || roc.n_neg == 0)
    throw DataError("ROC needs at least one positive and one negative voxel");

  const double P = static_cast<double>(roc.n_pos), N = static_cast<double>(roc.n_neg);
  roc.points.push_back({static_cast<double>(kRocThresholds) / kLast, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = kRocThresholds; k-- > 0;) {
    tp += pos_at[k];
    fp += neg_at[k];
    roc.points.push_back({static_cast<double>(k) / kLast, fp / N, tp / P});
  }
  double area = 0.0;
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  roc.auc = area;
  return roc;
}

RocCurve roc_auc(const SaliencyMap& map, const GroundTruthMasks& gt) {
  return roc_auc(map, gt, 0, map.values.size());
}

double nss(const SaliencyMap& map, const GroundTruthMasks& gt) {
  check_pair(map, gt);
  const double n = static_cast<double>(map.values.size());
  double mean = 0.0;
  for (float v : map.values) mean += v;
  mean /= n;
  double var = 0.0;
  for (float v : map.values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) throw DataError("undefined NSS: saliency map has zero variance");

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (!gt.mask[i]) continue;
    acc += (map.values[i] - mean) / sd;
    ++count;
  }
  if (count == 0) throw DataError("undefined NSS: ground truth has no positives");
  return acc / static_cast<double>(count);
}

SequenceReport evaluate_sequence(const std::string& name, const SaliencyMap& map,
                                 const GroundTruthMasks& gt) {
  SequenceReport r;
  r.sequence = name;
  r.roc = roc_auc(map, gt);
  r.auc = r.roc.auc;
  r.n_pos = r.roc.n_pos;
  r.n_neg = r.roc.n_neg;
  r.nss = nss(map, gt);
  const std::size_t P = map.dims.frame_size();
  for (std::size_t f = 0; f < map.dims.frames; ++f) {
    const auto first = gt.mask.begin() + static_cast<std::ptrdiff_t>(f * P);
    const auto pos = static_cast<std::size_t>(std::count(first, first + static_cast<std::ptrdiff_t>(P), 1));
    if (pos == 0 || pos == P) {
      r.frame_auc.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    r.frame_auc.push_back(roc_auc(map, gt, f * P, (f + 1) * P).auc);
  }
  return r;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<SequenceReport>& reports) {
  auto os = open_out(path);
  os << "sequence,auc,nss,n_pos,n_neg\n";
  for (const auto& r : reports)
    os << r.sequence << ',' << fmt("%.8f", r.auc) << ',' << fmt("%.8f", r.nss) << ',' << r.n_pos
       << ',' << r.n_neg << '\n';
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

std::vector<SequenceReport> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "sequence,auc,nss,n_pos,n_neg")
    throw DataError("unexpected metrics.csv header in " + path.string());
  std::vector<SequenceReport> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw DataError("malformed metrics row: " + line);
    SequenceReport r;
    r.sequence = cells[0];
    r.auc = std::stod(cells[1]);
    r.nss = std::stod(cells[2]);
    r.n_pos = std::stoul(cells[3]);
    r.n_neg = std::stoul(cells[4]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc) {
  auto os = open_out(path);
  os << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points)
    os << fmt("%.8f", p.threshold) << ',' << fmt("%.8f", p.fpr) << ',' << fmt("%.8f", p.tpr)
       << '\n';
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

void write_roc_points(const std::filesystem::path& path, const RocCurve& roc) {
  auto os = open_out(path);
  os << "# fpr tpr  (auc = " << fmt("%.6f", roc.auc) << ")\n";
  for (const auto& p : roc.points) os << fmt("%.8f", p.fpr) << ' ' << fmt("%.8f", p.tpr) << '\n';
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

void write_frame_auc_csv(const std::filesystem::path& path, const SequenceReport& report) {
  auto os = open_out(path);
  os << "frame,auc\n";
  for (std::size_t f = 0; f < report.frame_auc.size(); ++f) {
    os << f + 1 << ',';
    if (std::isnan(report.frame_auc[f])) os << "nan\n";
    else os << fmt("%.8f", report.frame_auc[f]) << '\n';
  }
  // Mean over frames where the AUC is defined.
  double sum = 0.0;
  std::size_t n = 0;
  for (double a : report.frame_auc)
    if (!std::isnan(a)) sum += a, ++n;
  os << "mean,";
  if (n) os << fmt("%.8f", sum / static_cast<double>(n)) << '\n';
  else os << "nan\n";
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

}  // namespace salgraph
