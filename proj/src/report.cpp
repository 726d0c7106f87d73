#include "slottta/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "slottta/csvio.hpp"
#include "slottta/errors.hpp"
#include "slottta/ppm.hpp"

namespace slottta {

namespace fs = std::filesystem;

namespace {

bool is_aggregate(const std::string& id) { return id == "mean" || id == "stddev"; }

struct Series {
  std::string name;
  std::vector<double> direct, tta, cosine, improvement;
};

Series load_series(const std::string& name, const std::string& path) {
  const CsvTable t = read_csv_file(path);
  Series s;
  s.name = name;
  const int ci = t.column("sample_id");
  const int cd = t.column("ari_direct");
  int ct = -1, cc = -1;
  for (size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "ari_tta") ct = static_cast<int>(i);
    if (t.header[i] == "grad_cosine") cc = static_cast<int>(i);
  }
  for (size_t r = 0; r < t.rows.size(); ++r) {
    if (is_aggregate(t.rows[r][static_cast<size_t>(ci)])) continue;
    s.direct.push_back(t.number(r, cd));
    if (ct >= 0) s.tta.push_back(t.number(r, ct));
    if (cc >= 0) s.cosine.push_back(t.number(r, cc));
  }
  if (ct >= 0)
    for (size_t i = 0; i < s.direct.size(); ++i) s.improvement.push_back(s.tta[i] - s.direct[i]);
  return s;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0, 0};
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - m) * (x - m);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

struct Canvas {
  int w, h;
  Tensor<float> img;
  Canvas(int width, int height) : w(width), h(height), img(Tensor<float>::full({height, width, 3}, 1.0f)) {}
  void put(int x, int y, float r, float g, float b) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    float* p = img.data.data() + (static_cast<size_t>(y) * w + x) * 3;
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  void rect(int x0, int y0, int x1, int y1, float r, float g, float b) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) put(x, y, r, g, b);
  }
  void dot(int x, int y, float r, float g, float b) {
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) put(x + dx, y + dy, r, g, b);
  }
};

}  // namespace

void emit_report(const std::vector<std::pair<std::string, std::string>>& named_csvs, const std::string& out_dir) {
  if (named_csvs.empty()) throw InputError("emit_report: no input CSVs");
  fs::create_directories(out_dir);

  std::vector<Series> all;
  for (const auto& [name, path] : named_csvs) all.push_back(load_series(name, path));

  std::ostringstream summary;
  summary << "split,kind,n,mean_ari,std_ari\n";
  for (const auto& s : all) {
    const auto [md, sd] = mean_std(s.direct);
    summary << s.name << ",direct," << s.direct.size() << "," << fmt_double(md) << "," << fmt_double(sd) << "\n";
    if (!s.tta.empty()) {
      const auto [mt, st] = mean_std(s.tta);
      summary << s.name << ",tta," << s.tta.size() << "," << fmt_double(mt) << "," << fmt_double(st) << "\n";
    }
  }
  atomic_write_file((fs::path(out_dir) / "summary.csv").string(), summary.str());

  // scatter: grad_cosine vs ARI improvement, all splits pooled
  std::vector<double> xs, ys;
  for (const auto& s : all)
    for (size_t i = 0; i < s.improvement.size() && i < s.cosine.size(); ++i) {
      xs.push_back(s.cosine[i]);
      ys.push_back(s.improvement[i]);
    }
  if (!xs.empty()) {
    double xmin = *std::min_element(xs.begin(), xs.end()), xmax = *std::max_element(xs.begin(), xs.end());
    double ymin = *std::min_element(ys.begin(), ys.end()), ymax = *std::max_element(ys.begin(), ys.end());
    if (xmax - xmin < 1e-9) {
      xmin -= 0.5;
      xmax += 0.5;
    }
    if (ymax - ymin < 1e-9) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    const int w = 360, h = 240, pad = 12;
    Canvas c(w, h);
    c.rect(pad, pad, w - pad, h - pad, 0.93f, 0.93f, 0.93f);
    // zero axes when inside range
    if (ymin < 0 && ymax > 0) {
      const int y0 = h - pad - static_cast<int>((0 - ymin) / (ymax - ymin) * (h - 2 * pad));
      c.rect(pad, y0, w - pad, y0, 0.6f, 0.6f, 0.6f);
    }
    if (xmin < 0 && xmax > 0) {
      const int x0 = pad + static_cast<int>((0 - xmin) / (xmax - xmin) * (w - 2 * pad));
      c.rect(x0, pad, x0, h - pad, 0.6f, 0.6f, 0.6f);
    }
    for (size_t i = 0; i < xs.size(); ++i) {
      const int px = pad + static_cast<int>((xs[i] - xmin) / (xmax - xmin) * (w - 2 * pad));
      const int py = h - pad - static_cast<int>((ys[i] - ymin) / (ymax - ymin) * (h - 2 * pad));
      c.dot(px, py, 0.80f, 0.15f, 0.15f);
    }
    write_ppm((fs::path(out_dir) / "scatter.ppm").string(), c.img);
  }

  // bars: per split, direct (gray) and tta (red) mean ARI in [0,1]
  {
    const int w = 80 * static_cast<int>(all.size()) + 40, h = 200, pad = 16;
    Canvas c(std::max(w, 120), h);
    int x = pad;
    for (const auto& s : all) {
      const auto [md, _sd] = mean_std(s.direct);
      const int hd = static_cast<int>(std::clamp(md, 0.0, 1.0) * (h - 2 * pad));
      c.rect(x, h - pad - hd, x + 24, h - pad, 0.55f, 0.55f, 0.55f);
      if (!s.tta.empty()) {
        const auto [mt, _st] = mean_std(s.tta);
        const int ht = static_cast<int>(std::clamp(mt, 0.0, 1.0) * (h - 2 * pad));
        c.rect(x + 30, h - pad - ht, x + 54, h - pad, 0.80f, 0.15f, 0.15f);
      }
      x += 80;
    }
    write_ppm((fs::path(out_dir) / "bars.ppm").string(), c.img);
  }
}

}  // namespace slottta
