// Copyright 2026 The wugbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "wugbench/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "wugbench/error.hpp"

namespace wugbench::report {
namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

namespace {

std::string fixed(double v, int digits = 3) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, digits);
  std::string s(buf.data(), end);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw InputError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string trials_csv(std::string_view experiment, const std::vector<AlternationTrial>& trials) {
  std::string s(kTrialsHeader);
  s += '\n';
  for (const auto& t : trials) {
    s += std::string(experiment) + ',' + t.alternation_id + ',' +
         std::string(to_string(t.train_frame)) + ',' + std::to_string(t.seed_index) + ',' +
         format_double(t.p_in) + ',' + format_double(t.p_out_mean) + ',' +
         (t.correct ? "1" : "0") + '\n';
  }
  return s;
}

std::string selectional_trials_csv(const std::vector<SelectionalTrial>& trials) {
  std::string s(kSelectionalTrialsHeader);
  s += '\n';
  for (const auto& t : trials) {
    s += std::to_string(t.seed_index);
    for (double v : t.surprisal) s += ',' + format_double(v);
    for (bool f : t.flags) s += f ? ",1" : ",0";
    s += '\n';
  }
  return s;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string s(kSummaryHeader);
  s += '\n';
  for (const auto& r : rows) {
    const auto& a = r.summary;
    s += r.experiment + ',' + r.group + ',' + std::to_string(a.successes) + ',' +
         std::to_string(a.n) + ',' + format_double(a.proportion) + ',' +
         format_double(a.ci_low) + ',' + format_double(a.ci_high) + ',' +
         format_double(a.p_value) + '\n';
  }
  return s;
}

std::string asymmetry_csv(const std::vector<AsymmetryRow>& rows) {
  std::string s(kAsymmetryHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += r.alternation_id + ',' + std::string(to_string(r.train_frame)) + ',' +
         std::to_string(r.successes) + ',' + std::to_string(r.n) + ',' +
         format_double(r.accuracy) + ',' +
         (r.sister_accuracy < 0 ? std::string("NA") : format_double(r.sister_accuracy)) + ',' +
         (r.below_baseline ? "1" : "0") + '\n';
  }
  return s;
}

std::string conditions_csv(const std::vector<ConditionRow>& rows) {
  std::string s(kConditionsHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += r.condition + ',' + std::to_string(r.n_sentences) + ',' + std::to_string(r.n_seeds) +
         ',' + format_double(r.mean) + ',' + format_double(r.sd) + '\n';
  }
  return s;
}

std::string probe_trials_csv(std::string_view experiment, const std::vector<ProbeTrialRow>& rows) {
  std::string s(kProbeTrialsHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += std::string(experiment) + ',' + r.alternation_id + ',' +
         std::string(to_string(r.train_frame)) + ',' + std::to_string(r.seed_index) + ',' +
         r.outclass + ',' + format_double(r.train_accuracy) + ',' + std::to_string(r.label) +
         ',' + format_double(r.score) + '\n';
  }
  return s;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::string s(kCorrelationHeader);
  s += '\n';
  for (const auto& r : rows)
    s += r.measure + ',' + std::to_string(r.n) + ',' +
         (r.defined ? format_double(r.value) : std::string("NA")) + '\n';
  return s;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::vector<SummaryRow> parse_summary_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw InputError("summary csv: empty file");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kSummaryHeader) throw InputError("summary csv: unexpected header " + header);
  std::vector<SummaryRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 8)
      throw InputError("summary csv: row " + std::to_string(i + 1) + " has " +
                       std::to_string(f.size()) + " fields");
    try {
      SummaryRow r{f[0], f[1], {}};
      r.summary.successes = std::stoul(f[2]);
      r.summary.n = std::stoul(f[3]);
      r.summary.proportion = std::stod(f[4]);
      r.summary.ci_low = std::stod(f[5]);
      r.summary.ci_high = std::stod(f[6]);
      r.summary.p_value = std::stod(f[7]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InputError("summary csv: bad number in row " + std::to_string(i + 1));
    }
  }
  return out;
}

std::string emit_chart(const std::vector<ChartBar>& bars, const ChartStyle& style) {
  if (bars.empty()) throw UsageError("emit_chart: no rows");
  double y_max = style.y_max;
  if (!(y_max > 0)) {
    y_max = 0;
    for (const auto& b : bars) y_max = std::max({y_max, b.value, b.err_high});
    y_max = y_max > 0 ? std::ceil(y_max * 1.1) : 1.0;
  }
  constexpr double kBar = 14.0, kGap = 6.0, kGroupGap = 14.0, kBottom = 150.0;
  constexpr std::array<const char*, 10> kPalette = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                                    "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
                                                    "#ccb974", "#64b5cd"};
  std::map<std::string, std::size_t> colour;
  std::vector<std::string> categories;
  for (const auto& b : bars) {
    if (colour.emplace(b.category, colour.size()).second) categories.push_back(b.category);
  }
  std::vector<double> xs;
  double x = kPlotLeft + kGap;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    if (i > 0) x += (bars[i].category != bars[i - 1].category) ? kGroupGap : kGap;
    xs.push_back(x);
    x += kBar;
  }
  const double plot_right = x + kGap;
  const double width = plot_right + 170.0;
  const double height = kPlotTop + kPlotHeight + kBottom;
  auto y_of = [&](double v) {
    v = std::clamp(v, 0.0, y_max);
    return kPlotTop + kPlotHeight * (1.0 - v / y_max);
  };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\""
    << fixed(height) << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height)
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  o << "<title>" << xml_escape(style.title) << "</title>\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(kPlotLeft) << "\" y=\"20\" font-size=\"13\">"
    << xml_escape(style.title) << "</text>\n";
  // Axes and ticks.
  o << "<g class=\"axes\" stroke=\"black\">\n";
  o << "<line x1=\"" << fixed(kPlotLeft) << "\" y1=\"" << fixed(kPlotTop) << "\" x2=\""
    << fixed(kPlotLeft) << "\" y2=\"" << fixed(kPlotTop + kPlotHeight) << "\"/>\n";
  o << "<line x1=\"" << fixed(kPlotLeft) << "\" y1=\"" << fixed(kPlotTop + kPlotHeight)
    << "\" x2=\"" << fixed(plot_right) << "\" y2=\"" << fixed(kPlotTop + kPlotHeight)
    << "\"/>\n";
  o << "</g>\n";
  for (int t = 0; t <= 4; ++t) {
    double v = y_max * t / 4.0;
    o << "<text class=\"tick\" x=\"" << fixed(kPlotLeft - 5) << "\" y=\"" << fixed(y_of(v) + 3)
      << "\" text-anchor=\"end\">" << format_double(std::round(v * 1000) / 1000) << "</text>\n";
  }
  o << "<text x=\"15\" y=\"" << fixed(kPlotTop + kPlotHeight / 2)
    << "\" transform=\"rotate(-90 15 " << fixed(kPlotTop + kPlotHeight / 2)
    << ")\" text-anchor=\"middle\">" << xml_escape(style.y_label) << "</text>\n";

  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double top = y_of(b.value);
    o << "<rect class=\"bar\" data-label=\"" << xml_escape(b.label) << "\" x=\"" << fixed(xs[i])
      << "\" y=\"" << fixed(top, 4) << "\" width=\"" << fixed(kBar) << "\" height=\""
      << fixed(kPlotTop + kPlotHeight - top, 4) << "\" fill=\""
      << kPalette[colour[b.category] % kPalette.size()] << "\"/>\n";
    const double cx = xs[i] + kBar / 2;
    o << "<line class=\"err\" x1=\"" << fixed(cx) << "\" y1=\"" << fixed(y_of(b.err_low), 4)
      << "\" x2=\"" << fixed(cx) << "\" y2=\"" << fixed(y_of(b.err_high), 4)
      << "\" stroke=\"black\"/>\n";
    const double ly = kPlotTop + kPlotHeight + 8;
    o << "<text class=\"label\" x=\"" << fixed(cx + 3) << "\" y=\"" << fixed(ly)
      << "\" transform=\"rotate(60 " << fixed(cx + 3) << ' ' << fixed(ly) << ")\">"
      << xml_escape(b.label) << "</text>\n";
  }
  if (style.baseline && 0.5 <= y_max) {
    o << "<line class=\"baseline\" x1=\"" << fixed(kPlotLeft) << "\" y1=\"" << fixed(y_of(0.5), 4)
      << "\" x2=\"" << fixed(plot_right) << "\" y2=\"" << fixed(y_of(0.5), 4)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double ly = kPlotTop + 14.0 * static_cast<double>(c);
    o << "<rect x=\"" << fixed(plot_right + 15) << "\" y=\"" << fixed(ly) << "\" width=\"10\" "
      << "height=\"10\" fill=\"" << kPalette[c % kPalette.size()] << "\"/>\n";
    o << "<text x=\"" << fixed(plot_right + 30) << "\" y=\"" << fixed(ly + 9) << "\">"
      << xml_escape(categories[c]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace wugbench::report
