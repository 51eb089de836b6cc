#include "baycv/plot.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace baycv {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 60.0;
constexpr double kBaseY = 540.0;
constexpr double kSide = kWidth - 2.0 * kMargin;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

double px(const SimplexPoint& p) { return kMargin + kSide * p.x; }
double py(const SimplexPoint& p) { return kBaseY - kSide * p.y; }

}  // namespace

std::vector<SimplexPoint> posterior_simplex_points(const PosteriorChains& chains,
                                                   const RopeInterval& rope) {
  const RopeInterval scaled(rope.halfwidth / chains.standardization_constant);
  const auto& delta0 = chains.trace("delta0");
  const auto& sigma0 = chains.trace("sigma0");
  const auto& nu = chains.trace("nu");
  std::vector<SimplexPoint> points;
  points.reserve(chains.n_draws());
  for (std::size_t c = 0; c < delta0.chains.size(); ++c) {
    for (std::size_t d = 0; d < delta0.chains[c].size(); ++d) {
      const auto p = region_probs(delta0.chains[c][d], sigma0.chains[c][d],
                                  nu.chains[c][d], scaled);
      points.push_back(simplex_coordinates(p.left, p.rope, p.right));
    }
  }
  return points;
}

void write_simplex_svg(std::ostream& out,
                       const std::vector<SimplexPoint>& points,
                       const DecisionTriple& triple,
                       const SimplexLabels& labels,
                       const std::string& manifest_ref) {
  const SimplexPoint left{0.0, 0.0};
  const SimplexPoint right{1.0, 0.0};
  const SimplexPoint top{0.5, std::sqrt(3.0) / 2.0};

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!manifest_ref.empty()) {
    out << "<!-- manifest: " << escape(manifest_ref) << " -->\n";
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth)
      << ' ' << num(kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!labels.title.empty()) {
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"30.00\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << escape(labels.title) << "</text>\n";
  }
  out << "<polygon points=\"" << num(px(left)) << ',' << num(py(left)) << ' '
      << num(px(top)) << ',' << num(py(top)) << ' ' << num(px(right)) << ','
      << num(py(right))
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

  out << "<g fill=\"steelblue\" fill-opacity=\"0.15\">\n";
  for (const auto& p : points) {
    out << "<circle cx=\"" << num(px(p)) << "\" cy=\"" << num(py(p))
        << "\" r=\"1.5\"/>\n";
  }
  out << "</g>\n";

  auto label = [&](const SimplexPoint& at, double dx, double dy,
                   const char* anchor, const std::string& text,
                   const std::string& size) {
    out << "<text x=\"" << num(px(at) + dx) << "\" y=\"" << num(py(at) + dy)
        << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"" << size << "\">"
        << escape(text) << "</text>\n";
  };
  label(left, 0.0, 22.0, "middle", labels.left, "14");
  label(right, 0.0, 22.0, "middle", labels.right, "14");
  label(top, 0.0, -24.0, "middle", labels.rope, "14");
  label(left, 0.0, 40.0, "middle", "p = " + prob(triple.p_left), "12");
  label(right, 0.0, 40.0, "middle", "p = " + prob(triple.p_right), "12");
  label(top, 0.0, -8.0, "middle", "p = " + prob(triple.p_rope), "12");
  out << "</svg>\n";
}

}  // namespace baycv
