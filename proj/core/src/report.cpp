#include "maleo/report.hpp"

#include "maleo/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef MALEO_VERSION
#define MALEO_VERSION "0.0.0"
#endif

namespace maleo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string fixed(double v, int digits = 1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

json complex_vec(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
  return a;
}

json complex_mat(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(r));
  }
  return rows;
}

CVec read_vec(const json& a) {
  CVec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = {a[i][0].get<double>(), a[i][1].get<double>()};
  }
  return v;
}

CMat read_mat(const json& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  CMat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& r = a[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != n) throw std::runtime_error("matrix is not square");
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = {r[static_cast<std::size_t>(j)][0].get<double>(),
                 r[static_cast<std::size_t>(j)][1].get<double>()};
    }
  }
  return m;
}

json layout_json(const MaLayout& l) {
  json a = json::array();
  for (const Vec2& q : l.q) a.push_back({q.x(), q.y()});
  return a;
}

MaLayout read_layout(const json& a, const MaLayout& like) {
  MaLayout l = like;
  l.q.clear();
  for (const auto& p : a) l.q.emplace_back(p[0].get<double>(), p[1].get<double>());
  return l;
}

json audit_json(const SlotAudit& a) {
  return {{"power", a.power}, {"sinr", a.sinr}, {"region", a.region}, {"spacing", a.spacing},
          {"speed", a.speed}};
}

Method method_from(const std::string& s) {
  if (s == "proposed") return Method::Proposed;
  if (s == "bench2") return Method::FixedUpa;
  if (s == "bench1") return Method::Random;
  throw std::runtime_error("unknown method '" + s + "'");
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

const char* version() { return MALEO_VERSION; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string render_csv(const Table& table,
                       const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::string out;
  out += "# maleo " + std::string(version()) + "\n";
  out += "# table: " + table.name + "\n";
  for (const auto& [k, v] : metadata) out += "# " + k + ": " + v + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string render_svg(const PlotSpec& plot) {
  constexpr double W = 720, H = 460, L = 80, R = 190, T = 40, B = 60;
  auto ty = [&](double y) { return plot.log_y ? (y > 0 ? std::log10(y) : std::nan("")) : y; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << (W - R + L) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    o << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << H - B << "\" x2=\"" << fixed(px(xv))
      << "\" y2=\"" << H - B + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << tick_label(xv) << "</text>\n";
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << L << "\" y2=\""
      << fixed(py(yv)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << L - 8 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
      << tick_label(plot.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  o << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
    << xml_escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << (H - B + T) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(plot.y_label)
    << (plot.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      const std::string cx = fixed(px(s.x[i])), cy = fixed(py(y));
      pts += cx + "," + cy + " ";
      o << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << (plot.markers_only ? 3 : 2)
        << "\" fill=\"" << color << "\"/>\n";
    }
    if (!plot.markers_only && !pts.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
        << "\"/>\n";
    }
    const double ly = T + 14 + 18 * static_cast<double>(k);
    o << "<rect x=\"" << W - R + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\""
      << color << "\"/>\n";
    o << "<text x=\"" << W - R + 30 << "\" y=\"" << ly + 1 << "\">" << xml_escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string solutions_json(const std::vector<SolutionRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    json j;
    j["run"] = r.run;
    j["method"] = to_string(r.method);
    j["p_max_dbw"] = r.p_max_dbw;
    j["threshold_db"] = r.threshold_db ? json(*r.threshold_db) : json(nullptr);
    j["slot"] = r.slot;
    j["ok"] = r.ok;
    j["sdr_fallback"] = r.sdr_fallback;
    if (r.ok) {
      j["layout"] = layout_json(r.layout);
      j["q_prev"] = layout_json(r.q_prev);
      j["wc"] = complex_mat(r.cov.wc);
      j["rs"] = complex_mat(r.cov.rs);
      j["w"] = r.cov.w ? complex_vec(*r.cov.w) : json(nullptr);
      j["objective_m2"] = r.objective;
      j["audit"] = audit_json(r.audit);
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<SolutionRecord> parse_solutions(const std::string& text, const ScenarioConfig& cfg) {
  const json arr = json::parse(text);
  MaLayout like;
  like.region = cfg.region();
  like.d_min = cfg.array.d_min_m;
  like.v_max = cfg.array.v_max_mps;
  std::vector<SolutionRecord> out;
  for (const auto& j : arr) {
    SolutionRecord r;
    r.run = j.at("run").get<std::string>();
    r.method = method_from(j.at("method").get<std::string>());
    r.p_max_dbw = j.at("p_max_dbw").get<double>();
    if (!j.at("threshold_db").is_null()) r.threshold_db = j.at("threshold_db").get<double>();
    r.slot = j.at("slot").get<int>();
    r.ok = j.at("ok").get<bool>();
    r.sdr_fallback = j.at("sdr_fallback").get<bool>();
    if (r.ok) {
      r.layout = read_layout(j.at("layout"), like);
      r.q_prev = read_layout(j.at("q_prev"), like);
      r.cov.wc = read_mat(j.at("wc"));
      r.cov.rs = read_mat(j.at("rs"));
      if (!j.at("w").is_null()) r.cov.w = read_vec(j.at("w"));
      r.objective = j.at("objective_m2").get<double>();
      const json& a = j.at("audit");
      r.audit.power = a.at("power").get<bool>();
      r.audit.sinr = a.at("sinr").get<bool>();
      r.audit.region = a.at("region").get<bool>();
      r.audit.spacing = a.at("spacing").get<bool>();
      r.audit.speed = a.at("speed").get<bool>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_output(const ExperimentOutput& out, const ScenarioConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& t : out.tables) write_file(dir / (t.name + ".csv"), render_csv(t, out.metadata));
  for (const auto& p : out.plots) write_file(dir / (p.name + ".svg"), render_svg(p));
  write_file(dir / "config.json", to_json(cfg));
  write_file(dir / "solutions.json", solutions_json(out.solutions));

  json run;
  run["experiment"] = out.experiment;
  run["version"] = version();
  run["seconds"] = out.seconds;
  run["failures"] = out.failures;
  json timings = json::array();
  for (const auto& t : out.timings) {
    timings.push_back({{"run", t.run}, {"seconds", t.seconds}, {"slot_failures", t.failures},
                       {"max_primal_residual", t.max_residual}});
  }
  run["runs"] = timings;
  json meta = json::object();
  for (const auto& [k, v] : out.metadata) meta[k] = v;
  run["metadata"] = meta;
  write_file(dir / "run.json", run.dump(2) + "\n");
}

AuditReport audit_directory(const fs::path& dir) {
  AuditReport rep;
  ScenarioConfig cfg;
  try {
    cfg = parse_config(read_file(dir / "config.json"));
  } catch (const ConfigError& e) {
    rep.problems.push_back(std::string("config.json: ") + e.what());
    return rep;
  } catch (const std::exception& e) {
    rep.problems.push_back(e.what());
    return rep;
  }
  const Scenario sc = build_scenario(cfg);

  char hash[24];
  std::snprintf(hash, sizeof hash, "0x%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  const std::string expected = std::string("# config_hash: ") + hash;
  std::vector<fs::path> csvs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv") csvs.push_back(e.path());
  }
  std::sort(csvs.begin(), csvs.end());
  for (const auto& p : csvs) {
    ++rep.tables;
    const std::string text = read_file(p);
    if (text.find(expected + "\n") == std::string::npos) {
      rep.problems.push_back(p.filename().string() + ": config hash does not match config.json");
    }
  }

  std::vector<SolutionRecord> records;
  try {
    records = parse_solutions(read_file(dir / "solutions.json"), cfg);
  } catch (const std::exception& e) {
    rep.problems.push_back(std::string("solutions.json: ") + e.what());
    return rep;
  }

  for (const auto& r : records) {
    ++rep.records;
    const std::string where = r.run + " slot " + std::to_string(r.slot);
    if (!r.ok) continue;  // failures are reported in run.json
    if (r.slot < 1 || r.slot > static_cast<int>(sc.problems.size())) {
      rep.problems.push_back(where + ": slot index out of range");
      continue;
    }
    auto problems = with_threshold({sc.problems[static_cast<std::size_t>(r.slot - 1)]}, r.threshold_db);
    SlotProblem& problem = problems.front();
    problem.p_max = dbw_to_watts(r.p_max_dbw);
    if (r.layout.size() != cfg.array.n_tx || r.cov.size() != cfg.array.n_tx) {
      rep.problems.push_back(where + ": dimension mismatch");
      continue;
    }
    const SlotAudit a = audit_slot(problem, r.cov, r.layout, r.q_prev, sc.max_step_m);
    auto check = [&](bool stored, bool now, const char* what) {
      if (stored != now) {
        rep.problems.push_back(where + ": recorded " + what + " flag " + (stored ? "true" : "false") +
                               " but recomputed " + (now ? "true" : "false"));
      }
      if (r.method != Method::Random && !now) {
        rep.problems.push_back(where + ": " + what + " constraint violated");
      }
    };
    check(r.audit.power, a.power, "power");
    check(r.audit.sinr, a.sinr, "sinr");
    check(r.audit.region, a.region, "region");
    check(r.audit.spacing, a.spacing, "spacing");
    check(r.audit.speed, a.speed, "speed");
    if (r.method != Method::Random) {
      const double f = scene_objective(problem.scene, problem.slot, r.layout, r.cov.rx());
      if (!(std::abs(f - r.objective) <= 1e-9 * std::abs(f))) {
        rep.problems.push_back(where + ": objective " + format_number(r.objective) +
                               " does not match recomputed " + format_number(f));
      }
    }
  }
  return rep;
}

}  // namespace maleo
