#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "funnelgate/scenario.hpp"
#include "funnelgate/sim.hpp"

// Run artifacts: trajectory CSV, violation/certificate JSON, and
// self-contained SVG plots rendered without a plotting dependency.

namespace funnelgate {

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17);
    os << "t";
    for (int i = 1; i <= traj.state_dim; ++i) os << ",x" << i;
    if (traj.output_case) os << ",y";
    os << ",u1,u2,u,xi,eps,f,V1,V2,in_funnel\n";
    for (const auto& p : traj.points) {
        os << p.t;
        for (double v : p.x) os << ',' << v;
        if (traj.output_case) os << ',' << p.y;
        os << ',' << p.u1 << ',' << p.u2 << ',' << p.u << ',' << p.xi << ',' << p.eps << ','
           << p.f << ',' << p.v1 << ',' << p.v2 << ',' << (p.in_funnel ? 1 : 0) << '\n';
    }
}

inline json violation_report_to_json(const ViolationReport& r) {
    json j;
    j["all_clear"] = r.all_clear();
    j["funnel_exits"] = r.funnel_exits;
    j["set_exits"] = r.x_exits;
    j["input_exits"] = r.u_exits;
    j["clamp_events"] = r.clamp_events;
    j["nonfinite"] = r.nonfinite;
    j["first_funnel_exit"] = r.first_funnel_exit;
    j["first_set_exit"] = r.first_x_exit;
    j["first_input_exit"] = r.first_u_exit;
    j["first_clamp"] = r.first_clamp;
    j["first_nonfinite"] = r.first_nonfinite;
    j["min_funnel_margin"] = r.min_funnel_margin;
    j["min_set_margin"] = r.min_x_margin;
    j["min_input_margin"] = r.min_u_margin;
    return j;
}

inline json verify_report_to_json(const VerifyReport& r) {
    json j;
    j["feasible"] = r.feasible;
    j["eps_block_margin_plus"] = r.eps_block_margin_plus;
    j["eps_block_margin_minus"] = r.eps_block_margin_minus;
    j["h_block_margin"] = r.h_block_margin;
    j["scalar_eps_slack"] = r.scalar_eps_slack;
    j["scalar_h_slack"] = r.scalar_h_slack;
    j["dominance_margin"] = r.dominance_margin;
    j["h_min_eigenvalue"] = r.h_min_eigenvalue;
    return j;
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << '\n';
}

// ============================================================================
// SVG
// ============================================================================

struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f6fb2";
    double width = 1.2;
};

struct PlotBand { // shaded region between two curves over the same x grid
    std::vector<double> x;
    std::vector<double> y_lo;
    std::vector<double> y_hi;
    std::string color = "#9ecbe8";
};

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_band(PlotBand band) { bands_.push_back(std::move(band)); }
    void add_series(PlotSeries series) { series_.push_back(std::move(series)); }

    std::string render(int width = 760, int height = 480) const {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        auto stretch = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
            for (double v : xs) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
            for (double v : ys) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
        };
        for (const auto& b : bands_) { stretch(b.x, b.y_lo); stretch(b.x, b.y_hi); }
        for (const auto& s : series_) stretch(s.x, s.y);
        if (xmin > xmax) { xmin = 0; xmax = 1; }
        if (ymin > ymax) { ymin = 0; ymax = 1; }
        const double xpad = 0.04 * (xmax - xmin + 1e-12), ypad = 0.06 * (ymax - ymin + 1e-12);
        xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

        const double ml = 62, mr = 16, mt = 34, mb = 44;
        const double pw = width - ml - mr, ph = height - mt - mb;
        auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
        auto sy = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

        std::ostringstream os;
        os << std::setprecision(8);
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
           << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

        for (const auto& b : bands_) {
            os << "<polygon fill=\"" << b.color << "\" fill-opacity=\"0.45\" stroke=\"none\" points=\"";
            for (size_t i = 0; i < b.x.size(); ++i) os << sx(b.x[i]) << ',' << sy(b.y_hi[i]) << ' ';
            for (size_t i = b.x.size(); i-- > 0;) os << sx(b.x[i]) << ',' << sy(b.y_lo[i]) << ' ';
            os << "\"/>\n";
        }
        for (const auto& s : series_) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
               << "\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
            os << "\"/>\n";
        }

        // frame and ticks
        os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
           << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double xv = xmin + (xmax - xmin) * i / 5.0;
            const double yv = ymin + (ymax - ymin) * i / 5.0;
            os << "<line x1=\"" << sx(xv) << "\" y1=\"" << mt + ph << "\" x2=\"" << sx(xv)
               << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"#333\"/>\n";
            os << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 17
               << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
               << format_tick(xv) << "</text>\n";
            os << "<line x1=\"" << ml - 4 << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml << "\" y2=\""
               << sy(yv) << "\" stroke=\"#333\"/>\n";
            os << "<text x=\"" << ml - 7 << "\" y=\"" << sy(yv) + 4
               << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
               << format_tick(yv) << "</text>\n";
        }
        os << "<text x=\"" << ml + pw / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\""
           << " font-family=\"sans-serif\">" << title_ << "</text>\n";
        os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
           << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" << xlabel_
           << "</text>\n";
        os << "<text x=\"16\" y=\"" << mt + ph / 2
           << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\""
           << " transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << ylabel_ << "</text>\n";
        os << "</svg>\n";
        return os.str();
    }

    void save(const std::string& path, int width = 760, int height = 480) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path);
        os << render(width, height);
    }

  private:
    static std::string format_tick(double v) {
        std::ostringstream os;
        os << std::setprecision(3) << v;
        return os.str();
    }

    std::string title_, xlabel_, ylabel_;
    std::vector<PlotBand> bands_;
    std::vector<PlotSeries> series_;
};

namespace plot_detail {

// keep polylines at a sane size for the SVG files
inline size_t stride_for(size_t n, size_t target = 2000) { return std::max<size_t>(1, n / target); }

template <class Getter>
inline PlotSeries series_from(const Trajectory& traj, Getter get, std::string color) {
    PlotSeries s;
    s.color = std::move(color);
    const size_t stride = stride_for(traj.points.size());
    for (size_t i = 0; i < traj.points.size(); i += stride) {
        s.x.push_back(traj.points[i].t);
        s.y.push_back(get(traj.points[i]));
    }
    if (!traj.points.empty()) {
        s.x.push_back(traj.points.back().t);
        s.y.push_back(get(traj.points.back()));
    }
    return s;
}

// boundary of x'Qx = level, drawn as a parametric polyline
inline PlotSeries quadratic_level_curve(const Mat& q, double level, std::string color) {
    PlotSeries s;
    s.color = std::move(color);
    for (int i = 0; i <= 256; ++i) {
        const double th = 2.0 * M_PI * i / 256.0;
        const Vec dir{std::cos(th), std::sin(th)};
        const double qd = quad_form(q, dir);
        if (qd <= 0.0) continue;
        const double r = std::sqrt(level / qd);
        s.x.push_back(r * dir[0]);
        s.y.push_back(r * dir[1]);
    }
    return s;
}

// boundary of p2 u1^2 + p3 (|u2| + delta)^2 = level in the (u1, u2) plane
inline PlotSeries input_level_curve(double p2, double p3, double delta, double level,
                                    std::string color) {
    PlotSeries s;
    s.color = std::move(color);
    for (int i = 0; i <= 256; ++i) {
        const double th = 2.0 * M_PI * i / 256.0;
        const double cth = std::cos(th), sth = std::sin(th);
        const double a = p2 * cth * cth + p3 * sth * sth;
        const double b = 2.0 * p3 * delta * std::abs(sth);
        const double c = p3 * delta * delta - level;
        const double disc = b * b - 4.0 * a * c;
        if (a <= 0.0 || disc < 0.0) continue;
        const double r = (-b + std::sqrt(disc)) / (2.0 * a);
        if (r < 0.0) continue;
        s.x.push_back(r * cth);
        s.y.push_back(r * sth);
    }
    return s;
}

} // namespace plot_detail

// xi(t) with the funnel drawn as a shaded band
inline void write_xi_plot(const std::string& path, const Trajectory& traj,
                          const FunnelBounds& funnel) {
    SvgPlot plot("constraint aggregate inside the funnel", "t [s]", "xi");
    PlotBand band;
    const size_t stride = plot_detail::stride_for(traj.points.size());
    for (size_t i = 0; i < traj.points.size(); i += stride) {
        const double t = traj.points[i].t;
        band.x.push_back(t);
        band.y_lo.push_back(funnel.g_lo(t));
        band.y_hi.push_back(funnel.g_hi(t));
    }
    plot.add_band(std::move(band));
    plot.add_series(plot_detail::series_from(traj, [](const TrajectoryPoint& p) { return p.xi; },
                                             "#b2341f"));
    plot.save(path);
}

// (x1, x2) phase plane with the outer x'P1x = g_hi(0) and inner
// x'P1_bar x = inf g_hi ellipses
inline void write_state_phase_plot(const std::string& path, const Trajectory& traj, const Mat& p1,
                                   const Mat& p1_bar, double outer_level, double inner_level) {
    SvgPlot plot("state phase plane", "x1", "x2");
    plot.add_series(plot_detail::quadratic_level_curve(p1, outer_level, "#777777"));
    plot.add_series(plot_detail::quadratic_level_curve(p1_bar, inner_level, "#2b8c57"));
    PlotSeries path_series;
    path_series.color = "#b2341f";
    const size_t stride = plot_detail::stride_for(traj.points.size());
    for (size_t i = 0; i < traj.points.size(); i += stride) {
        path_series.x.push_back(traj.points[i].x[0]);
        path_series.y.push_back(traj.points[i].x[1]);
    }
    plot.add_series(std::move(path_series));
    plot.save(path, 560, 560);
}

// (u1, u2) plane with the input level sets at g_hi(0) and inf g_hi
inline void write_input_phase_plot(const std::string& path, const Trajectory& traj, double p2,
                                   double p3, double delta, double outer_level,
                                   double inner_level) {
    SvgPlot plot("input phase plane", "u1", "u2");
    plot.add_series(plot_detail::input_level_curve(p2, p3, delta, outer_level, "#777777"));
    plot.add_series(plot_detail::input_level_curve(p2, p3, delta, inner_level, "#2b8c57"));
    PlotSeries path_series;
    path_series.color = "#b2341f";
    const size_t stride = plot_detail::stride_for(traj.points.size());
    for (size_t i = 0; i < traj.points.size(); i += stride) {
        path_series.x.push_back(traj.points[i].u1);
        path_series.y.push_back(traj.points[i].u2);
    }
    plot.add_series(std::move(path_series));
    plot.save(path, 560, 560);
}

// y / u1 / u2 time series for the output-feedback runs
inline void write_signal_plots(const std::string& dir, const Trajectory& traj,
                               double y_limit = 0.0) {
    {
        SvgPlot plot("output", "t [s]", "y");
        plot.add_series(plot_detail::series_from(traj, [](const TrajectoryPoint& p) { return p.y; },
                                                 "#b2341f"));
        if (y_limit > 0.0 && !traj.points.empty()) {
            PlotSeries hi, lo;
            hi.color = lo.color = "#777777";
            hi.x = lo.x = {traj.points.front().t, traj.points.back().t};
            hi.y = {y_limit, y_limit};
            lo.y = {-y_limit, -y_limit};
            plot.add_series(std::move(hi));
            plot.add_series(std::move(lo));
        }
        plot.save(dir + "/y.svg");
    }
    {
        SvgPlot plot("stabilizing input", "t [s]", "u1");
        plot.add_series(plot_detail::series_from(traj,
                                                 [](const TrajectoryPoint& p) { return p.u1; },
                                                 "#1f6fb2"));
        plot.save(dir + "/u1.svg");
    }
    {
        SvgPlot plot("constraint input", "t [s]", "u2");
        plot.add_series(plot_detail::series_from(traj,
                                                 [](const TrajectoryPoint& p) { return p.u2; },
                                                 "#2b8c57"));
        plot.save(dir + "/u2.svg");
    }
}

} // namespace funnelgate
