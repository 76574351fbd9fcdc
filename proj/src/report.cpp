// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vdit/error.hpp"

namespace vdit {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& file, const std::vector<std::string>& header) : columns_(header.size()) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  out_.open(file);
  VDIT_REQUIRE(out_.good(), ErrorKind::Io, file.string(), "cannot write csv");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
  VDIT_REQUIRE(labels.size() + values.size() == columns_, ErrorKind::InvalidArgument, "csv row",
               "cell count differs from the header");
  bool first = true;
  for (const auto& l : labels) {
    out_ << (first ? "" : ",") << l;
    first = false;
  }
  for (double v : values) {
    out_ << (first ? "" : ",") << format_number(v);
    first = false;
  }
  out_ << '\n';
}

CsvTable read_csv(const fs::path& file) {
  std::ifstream in(file);
  VDIT_REQUIRE(in.good(), ErrorKind::MissingFile, file.string(), "cannot open csv");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  VDIT_REQUIRE(out.good(), ErrorKind::Io, file.string(), "cannot write json");
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  VDIT_REQUIRE(in.good(), ErrorKind::MissingFile, file.string(), "cannot open json");
  return nlohmann::json::parse(in);
}

namespace {

const std::vector<cv::Scalar>& palette() {
  // BGR
  static const std::vector<cv::Scalar> p = {{180, 119, 31}, {14, 127, 255}, {44, 160, 44},  {40, 39, 214},
                                            {189, 103, 148}, {75, 86, 140}, {194, 119, 227}, {127, 127, 127},
                                            {34, 189, 188},  {207, 190, 23}};
  return p;
}

void check_write(const fs::path& file, const cv::Mat& img) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  VDIT_REQUIRE(cv::imwrite(file.string(), img), ErrorKind::Io, file.string(), "cannot write png");
}

}  // namespace

void plot_lines(const fs::path& file, const std::string& title, const std::string& x_label,
                const std::string& y_label, const std::vector<Series>& series) {
  const int W = 720, H = 440, left = 80, right = 170, top = 40, bottom = 60;
  cv::Mat img(H, W, CV_8UC3, cv::Scalar(255, 255, 255));
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const int pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + static_cast<int>(std::lround((x - x0) / (x1 - x0) * pw)); };
  auto py = [&](double y) { return top + ph - static_cast<int>(std::lround((y - y0) / (y1 - y0) * ph)); };
  const cv::Scalar black(0, 0, 0);
  cv::rectangle(img, {left, top}, {left + pw, top + ph}, black, 1);
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  cv::putText(img, title, {left, top - 14}, font, 0.55, black, 1, cv::LINE_AA);
  cv::putText(img, x_label, {left + pw / 2 - 30, H - 15}, font, 0.45, black, 1, cv::LINE_AA);
  cv::putText(img, y_label, {8, top + ph / 2}, font, 0.45, black, 1, cv::LINE_AA);
  cv::putText(img, format_number(std::round(x0 * 1000) / 1000), {left - 10, top + ph + 18}, font, 0.4, black);
  cv::putText(img, format_number(std::round(x1 * 1000) / 1000), {left + pw - 30, top + ph + 18}, font, 0.4, black);
  cv::putText(img, format_number(std::round(y0 * 1000) / 1000), {4, top + ph}, font, 0.4, black);
  cv::putText(img, format_number(std::round(y1 * 1000) / 1000), {4, top + 10}, font, 0.4, black);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto color = palette()[s % palette().size()];
    std::vector<cv::Point> pts;
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i)
      if (std::isfinite(series[s].y[i])) pts.emplace_back(px(series[s].x[i]), py(series[s].y[i]));
    if (pts.size() > 1) cv::polylines(img, pts, false, color, 2, cv::LINE_AA);
    for (const auto& p : pts)
      if (pts.size() <= 20) cv::circle(img, p, 3, color, cv::FILLED, cv::LINE_AA);
    const int ly = top + 12 + 20 * static_cast<int>(s);
    cv::line(img, {W - right + 10, ly - 4}, {W - right + 30, ly - 4}, color, 2);
    cv::putText(img, series[s].name, {W - right + 36, ly}, font, 0.42, black, 1, cv::LINE_AA);
  }
  check_write(file, img);
}

void save_label_strip(const fs::path& file, const torch::Tensor& labels, int scale) {
  VDIT_REQUIRE(labels.dim() == 3, ErrorKind::ShapeMismatch, "labels", "expected [T, h, w]");
  auto l = labels.to(torch::kInt64).contiguous();
  const auto T = l.size(0), h = l.size(1), w = l.size(2);
  const int gap = 4;
  cv::Mat img(static_cast<int>(h * scale), static_cast<int>(T * (w * scale + gap)), CV_8UC3,
              cv::Scalar(255, 255, 255));
  const auto a = l.accessor<int64_t, 3>();
  for (int64_t t = 0; t < T; ++t)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        const auto& c = palette()[static_cast<std::size_t>(a[t][y][x]) % palette().size()];
        const int ox = static_cast<int>(t * (w * scale + gap) + x * scale), oy = static_cast<int>(y * scale);
        cv::rectangle(img, {ox, oy}, {ox + scale - 1, oy + scale - 1}, c, cv::FILLED);
      }
  check_write(file, img);
}

}  // namespace vdit
