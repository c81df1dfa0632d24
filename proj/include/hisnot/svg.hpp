#pragma once

#include <cstdio>
#include <sstream>
#include <string>

namespace hisnot::svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Minimal deterministic SVG builder; emits byte-identical output for
// identical inputs (fixed formatting, no timestamps).
class Canvas {
 public:
  Canvas(double width, double height) : w_(width), h_(height) {
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\""
        << num(h_) << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\">\n";
    os_ << "<rect x=\"0\" y=\"0\" width=\"" << num(w_) << "\" height=\"" << num(h_)
        << "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, double opacity = 1.0) {
    os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
        << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
        << num(width) << "\"";
    if (opacity != 1.0) os_ << " stroke-opacity=\"" << num(opacity) << "\"";
    os_ << "/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0) {
    os_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
        << "\" fill=\"" << fill << "\"";
    if (opacity != 1.0) os_ << " fill-opacity=\"" << num(opacity) << "\"";
    os_ << "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none") {
    os_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
        << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int font_size = 12,
            const std::string& fill = "black", const std::string& anchor = "start") {
    os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"monospace\" "
        << "font-size=\"" << font_size << "\" fill=\"" << fill << "\" text-anchor=\"" << anchor
        << "\">" << s << "</text>\n";
  }

  void polyline_begin(const std::string& stroke, double width = 1.0) {
    os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
        << "\" points=\"";
  }
  void polyline_point(double x, double y) { os_ << num(x) << "," << num(y) << " "; }
  void polyline_end() { os_ << "\"/>\n"; }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  double w_, h_;
  std::ostringstream os_;
};

}  // namespace hisnot::svg
