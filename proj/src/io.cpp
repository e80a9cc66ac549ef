#include "stable_loewner/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "stable_loewner/errors.hpp"

namespace sle {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_path_csv(std::ostream& out, const LevyPath& path) {
  out << "t,W,is_large_jump\n";
  std::size_t next = 0;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    bool jump = false;
    while (next < path.large_jumps.size() && path.large_jumps[next].time <= path.times[i]) {
      jump = jump || path.large_jumps[next].time == path.times[i];
      ++next;
    }
    out << format_number(path.times[i]) << ',' << format_number(path.values[i]) << ','
        << (jump ? 1 : 0) << '\n';
  }
}

void write_driver_csv(std::ostream& out, const Driver& driver) {
  out << "t,W\n";
  for (std::size_t k = 0; k < driver.breakpoints.size(); ++k) {
    out << format_number(driver.breakpoints[k]) << ',' << format_number(driver.levels[k]) << '\n';
  }
  if (driver.horizon > driver.breakpoints.back()) {
    out << format_number(driver.horizon) << ',' << format_number(driver.levels.back()) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const HullApprox& hull) {
  out << "t,re,im,is_jump\n";
  std::size_t next = 0;
  for (std::size_t i = 0; i < hull.points.size(); ++i) {
    bool jump = false;
    while (next < hull.jumps.size() && hull.jumps[next].point_index <= i) {
      jump = jump || hull.jumps[next].point_index == i;
      ++next;
    }
    const auto& p = hull.points[i];
    out << format_number(p.t) << ',' << format_number(p.z.real()) << ','
        << format_number(p.z.imag()) << ',' << (jump ? 1 : 0) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<BackwardFlowState>& trajectory) {
  out << "t,X,Y,log_deriv\n";
  for (const auto& s : trajectory) {
    out << format_number(s.t) << ',' << format_number(s.X) << ',' << format_number(s.Y)
        << ',' << format_number(s.log_deriv) << '\n';
  }
}

Driver read_driver_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("driver csv: empty input");
  Driver d;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    std::string t_field, w_field;
    if (!std::getline(fields, t_field, ',') || !std::getline(fields, w_field, ',')) {
      throw ParameterError("driver csv: row " + std::to_string(row) + " needs t and W");
    }
    try {
      d.breakpoints.push_back(std::stod(t_field));
      d.levels.push_back(std::stod(w_field));
    } catch (const std::exception&) {
      throw ParameterError("driver csv: unreadable number on row " + std::to_string(row));
    }
  }
  if (d.breakpoints.empty()) throw ParameterError("driver csv: no rows");
  d.horizon = d.breakpoints.back();
  d.validate();
  return d;
}

void write_hull_svg(std::ostream& out, const HullApprox& hull,
                    const SvgOptions& options) {
  double x0 = -1.0, x1 = 1.0, y1 = 1.0;
  if (!hull.points.empty()) {
    x0 = x1 = hull.points.front().z.real();
    y1 = 0.0;
    for (const auto& p : hull.points) {
      x0 = std::min(x0, p.z.real());
      x1 = std::max(x1, p.z.real());
      y1 = std::max(y1, p.z.imag());
    }
  }
  const double pad = 0.05 * std::max({x1 - x0, y1, 1e-9});
  x0 -= pad;
  x1 += pad;
  y1 += pad;
  const double y0 = -pad;
  const double scale = std::min(options.width / (x1 - x0), options.height / (y1 - y0));
  const auto px = [&](double x) { return format_number((x - x0) * scale); };
  const auto py = [&](double y) { return format_number((y1 - y) * scale); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
      << options.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << px(x0) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(x1)
      << "\" y2=\"" << py(0.0) << "\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n";
  out << "<g fill=\"none\" stroke=\"" << options.stroke << "\" stroke-width=\""
      << format_number(options.stroke_width) << "\">\n";

  std::vector<std::size_t> breaks;
  for (const auto& j : hull.jumps) {
    if (std::abs(j.size) >= options.break_jump) breaks.push_back(j.point_index);
  }
  breaks.push_back(hull.points.size());
  std::size_t begin = 0;
  for (std::size_t end : breaks) {
    if (end > begin) {
      out << "<polyline points=\"";
      for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out << ' ';
        out << px(hull.points[i].z.real()) << ',' << py(hull.points[i].z.imag());
      }
      out << "\"/>\n";
    }
    begin = end;
  }
  out << "</g>\n</svg>\n";
}

}  // namespace sle
