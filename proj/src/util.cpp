#include "fblab/util.hpp"

namespace fblab {

namespace {

double pairwise_sum_rec(const double* p, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = p[0];
    for (std::size_t i = 1; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_rec(p, half) + pairwise_sum_rec(p + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_sum_rec(v.data(), v.size()); }

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::atan2(0.0, -1.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess, then Newton on P_n(x) = 0.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // One polishing step after convergence, then stop.
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        x -= p1 / dp;
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
  return rule;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int points,
                    int panels) {
  const GaussRule rule = gauss_legendre(points);
  std::vector<double> contributions;
  contributions.reserve(static_cast<std::size_t>(points) * panels);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int i = 0; i < points; ++i)
      contributions.push_back(0.5 * h * rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]));
  }
  return pairwise_sum(contributions);
}

}  // namespace fblab
