#pragma once

// CSV, JSON and SVG output for experiment artifacts.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "fsma/capacity.hpp"
#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/snn.hpp"
#include "fsma/weights.hpp"
#include "json.hpp"

namespace fsma::io {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), os_(path, std::ios::binary), columns_(header.size()) {
    if (!os_) throw IoError("cannot open " + path.string() + " for writing");
    write_line(header);
  }

  template <class... T>
  void row(const T&... v) {
    if (sizeof...(T) != columns_) throw InvalidArgument("csv row width does not match header of " + path_.string());
    std::vector<std::string> cells{cell(v)...};
    write_line(cells);
  }

  void row_cells(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("csv row width does not match header of " + path_.string());
    write_line(cells);
  }

  void close() {
    os_.close();
    if (os_.fail()) throw IoError("failed writing " + path_.string());
  }

 private:
  template <class T>
  static std::string cell(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(static_cast<double>(v));
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return std::string(std::string_view(v));
    }
  }

  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(cells[i]);
    }
    os_ << '\n';
    if (!os_) throw IoError("failed writing " + path_.string());
  }

  std::filesystem::path path_;
  std::ofstream os_;
  std::size_t columns_;
};

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.close();
  if (os.fail()) throw IoError("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline Dfa load_dfa(const std::filesystem::path& path) { return parse_dfa_spec(read_text(path)); }

// ---------------------------------------------------------------------------
// Trace files

inline void write_spikes_csv(const std::filesystem::path& path, const snn::SpikeTrace& tr) {
  CsvWriter w(path, {"t_ms", "neuron"});
  for (const auto& e : tr.events) w.row(e.t, e.neuron);
  w.close();
}

/// One column per q and b state: "<name>" and "b_<name>", then nu.
inline void write_rates_csv(const std::filesystem::path& path, const snn::RateSeries& rs, const Dfa& d) {
  std::vector<std::string> header{"t_ms"};
  for (const auto& q : d.states()) header.push_back(q);
  for (const auto& q : d.states()) header.push_back("b_" + q);
  header.push_back("nu");
  CsvWriter w(path, header);
  std::vector<std::string> cells(header.size());
  for (std::size_t k = 0; k < rs.t.size(); ++k) {
    std::size_t c = 0;
    cells[c++] = format_double(rs.t[k]);
    for (const auto& m : rs.m_q) cells[c++] = format_double(m[k]);
    for (const auto& m : rs.m_b) cells[c++] = format_double(m[k]);
    cells[c++] = format_double(rs.nu[k]);
    w.row_cells(cells);
  }
  w.close();
}

inline nlohmann::json decoded_walk_json(const snn::DecodedWalk& dw, const Dfa& d) {
  nlohmann::json visits = nlohmann::json::array();
  for (const auto& v : dw.visits) visits.push_back({{"state", d.state_name(v.state)}, {"t_enter_ms", v.t_enter}});
  return visits;
}

/// Crossbar read dump: one row per (read, line). Reads happen once per step
/// with spikes, so the k-th read belongs to the k-th distinct spike time.
inline void write_crossbar_reads_csv(const std::filesystem::path& path, const snn::SpikeTrace& tr,
                                     const std::vector<std::vector<double>>& reads) {
  std::vector<double> times;
  for (const auto& e : tr.events) {
    if (times.empty() || times.back() != e.t) times.push_back(e.t);
  }
  if (times.size() != reads.size()) throw InvalidArgument("crossbar read log does not match the spike trace");
  CsvWriter w(path, {"t_ms", "line", "current"});
  for (std::size_t k = 0; k < reads.size(); ++k) {
    for (std::size_t c = 0; c < reads[k].size(); ++c) w.row(times[k], c, reads[k][c]);
  }
  w.close();
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<capacity::TrialRecord>& trials) {
  CsvWriter w(path, {"n", "l", "p", "weight_mode", "trial", "seed", "success"});
  for (const auto& t : trials) w.row(t.n, t.l, t.p, capacity::to_string(t.mode), t.trial, t.seed, t.success());
  w.close();
}

inline void write_capacity_summary_csv(const std::filesystem::path& path, const capacity::SweepResult& r) {
  CsvWriter w(path, {"n", "p_max_ideal", "p_max_binary", "ratio"});
  for (const auto& s : r.summary) w.row(s.n, s.p_max_ideal, s.p_max_binary, s.ratio());
  w.close();
}

// ---------------------------------------------------------------------------
// SVG plots

namespace svg {

inline constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                       "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Fixed-size figure with one set of linear axes.
class Figure {
 public:
  Figure(double x0, double x1, double y0, double y1, std::string title, std::string xlabel, std::string ylabel,
         double width = 900, double height = 420)
      : x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1), y0_(y0), y1_(y1 > y0 ? y1 : y0 + 1), w_(width), h_(height) {
    body_ << "<text x=\"" << w_ / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
          << "</text>\n";
    body_ << "<text x=\"" << w_ / 2 << "\" y=\"" << h_ - 6 << "\" text-anchor=\"middle\" font-size=\"12\">"
          << esc(xlabel) << "</text>\n";
    body_ << "<text transform=\"translate(14," << h_ / 2 << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">"
          << esc(ylabel) << "</text>\n";
    axes();
  }

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (w_ - kLeft - kRight); }
  double py(double y) const { return h_ - kBottom - (y - y0_) / (y1_ - y0_) * (h_ - kTop - kBottom); }

  void dot(double x, double y, double r, std::string_view color) {
    body_ << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r << "\" fill=\"" << color << "\"/>\n";
  }

  void tick_mark(double x, double y, std::string_view color) {
    body_ << "<line x1=\"" << px(x) << "\" y1=\"" << py(y) - 1 << "\" x2=\"" << px(x) << "\" y2=\"" << py(y) + 1
          << "\" stroke=\"" << color << "\" stroke-width=\"0.8\"/>\n";
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y, std::string_view color) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) body_ << px(x[i]) << ',' << py(y[i]) << ' ';
    body_ << "\"/>\n";
  }

  void band(double xa, double xb, std::string_view color) {
    body_ << "<rect x=\"" << px(xa) << "\" y=\"" << kTop << "\" width=\"" << px(xb) - px(xa) << "\" height=\""
          << h_ - kTop - kBottom << "\" fill=\"" << color << "\" fill-opacity=\"0.15\"/>\n";
  }

  void label(double x, double y, std::string_view text, std::string_view color = "#000") {
    body_ << "<text x=\"" << px(x) << "\" y=\"" << py(y) << "\" font-size=\"10\" fill=\"" << color << "\">"
          << esc(text) << "</text>\n";
  }

  void legend(std::size_t slot, std::string_view text, std::string_view color) {
    const double y = kTop + 12 + 14 * static_cast<double>(slot);
    body_ << "<rect x=\"" << w_ - kRight + 8 << "\" y=\"" << y - 8 << "\" width=\"10\" height=\"10\" fill=\"" << color
          << "\"/>\n<text x=\"" << w_ - kRight + 22 << "\" y=\"" << y << "\" font-size=\"10\">" << esc(text)
          << "</text>\n";
  }

  std::string str() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
       << w_ << ' ' << h_ << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

  void save(const std::filesystem::path& path) const { write_text(path, str()); }

 private:
  static constexpr double kLeft = 60, kRight = 110, kTop = 30, kBottom = 40;

  void axes() {
    body_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w_ - kLeft - kRight << "\" height=\""
          << h_ - kTop - kBottom << "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double x = x0_ + (x1_ - x0_) * i / 5.0;
      const double y = y0_ + (y1_ - y0_) * i / 5.0;
      body_ << "<text x=\"" << px(x) << "\" y=\"" << h_ - kBottom + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
            << tick(x) << "</text>\n";
      body_ << "<text x=\"" << kLeft - 4 << "\" y=\"" << py(y) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
            << tick(y) << "</text>\n";
    }
  }

  static std::string tick(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
  }

  double x0_, x1_, y0_, y1_, w_, h_;
  std::ostringstream body_;
};

}  // namespace svg

/// Spike raster; neurons are sorted so each state's active set is contiguous
/// when `order` is given.
inline void plot_raster(const std::filesystem::path& path, const snn::SpikeTrace& tr, const std::string& title,
                        const std::vector<std::uint32_t>& neuron_rank = {}) {
  svg::Figure fig(0, tr.t_end, 0, static_cast<double>(tr.n), title, "t (ms)", "neuron");
  double t = 0;
  for (const auto& seg : tr.schedule) {
    if (seg.input) fig.band(t, t + seg.duration, svg::kPalette[*seg.input % svg::kPalette.size()]);
    t += seg.duration;
  }
  for (const auto& e : tr.events) {
    const double y = neuron_rank.empty() ? e.neuron : neuron_rank.at(e.neuron);
    fig.tick_mark(e.t, y, "#000");
  }
  fig.save(path);
}

/// m_q traces for the states in `show` (all states when empty).
inline void plot_rates(const std::filesystem::path& path, const snn::RateSeries& rs, const Dfa& d,
                       const std::string& title, std::vector<std::size_t> show = {}) {
  if (show.empty()) {
    for (std::size_t q = 0; q < d.num_states(); ++q) show.push_back(q);
  }
  double top = 1.0;
  for (auto q : show) top = std::max(top, *std::max_element(rs.m_q[q].begin(), rs.m_q[q].end()));
  svg::Figure fig(0, rs.t.empty() ? 1.0 : rs.t.back(), 0, top * 1.05, title, "t (ms)", "rate (Hz)");
  for (std::size_t k = 0; k < show.size(); ++k) {
    const auto* color = svg::kPalette[k % svg::kPalette.size()];
    fig.polyline(rs.t, rs.m_q[show[k]], color);
    fig.legend(k, d.state_name(show[k]), color);
  }
  fig.save(path);
}

/// Success rate per (N, P) cell for one weight mode; marker shade is success.
inline void plot_capacity(const std::filesystem::path& path, const capacity::SweepResult& r) {
  double pmax = 10, nmax = 1;
  for (const auto& c : r.cells) {
    pmax = std::max(pmax, static_cast<double>(c.p));
    nmax = std::max(nmax, static_cast<double>(c.n));
  }
  svg::Figure fig(0, nmax * 1.1, 0, pmax * 1.1, "capacity sweep", "N", "P");
  for (const auto& c : r.cells) {
    const double dx = c.mode == capacity::WeightMode::ideal ? -0.01 : 0.01;
    const int g = static_cast<int>(std::lround(255 * (1.0 - c.success)));
    std::ostringstream col;
    if (c.mode == capacity::WeightMode::ideal) {
      col << "rgb(" << g << ',' << g << ",255)";
    } else {
      col << "rgb(255," << g << ',' << g << ')';
    }
    fig.dot(static_cast<double>(c.n) * (1.0 + dx), static_cast<double>(c.p), 3, col.str());
  }
  fig.legend(0, "ideal", "rgb(0,0,255)");
  fig.legend(1, "binary", "rgb(255,0,0)");
  fig.save(path);
}

// ---------------------------------------------------------------------------
// Manifest

inline nlohmann::json manifest(const nlohmann::json& config, std::uint64_t seed, bool bit_exact,
                               const std::vector<std::string>& artifacts, const std::string& status) {
#ifdef FSMA_VERSION
  const char* version = FSMA_VERSION;
#else
  const char* version = "unknown";
#endif
  return {{"toolkit", "fsma"},
          {"version", version},
          {"seed", seed},
          {"bit_exact", bit_exact},
          {"status", status},
          {"config", config},
          {"artifacts", artifacts}};
}

}  // namespace fsma::io
