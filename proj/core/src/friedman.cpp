#include "volcast/friedman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "volcast/errors.hpp"

namespace volcast::data {

FriedmanResult friedman_test(const NllTable& table) {
    const int k = static_cast<int>(table.models.size());
    if (k < 2) throw DomainError("friedman_test: need at least 2 models");

    FriedmanResult result;
    std::vector<double> rank_sums(k, 0.0);
    std::vector<int> order(k);
    std::vector<double> ranks(k);

    for (const auto& row : table.rows) {
        if (static_cast<int>(row.size()) != k)
            throw DomainError("friedman_test: ragged table");
        bool complete = true;
        for (const auto& v : row)
            if (!v.has_value()) complete = false;
        if (!complete) {
            ++result.blocks_dropped;
            continue;
        }
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return *row[a] < *row[b]; });
        // Average ranks over tied runs.
        int i = 0;
        while (i < k) {
            int j = i;
            while (j + 1 < k && *row[order[j + 1]] == *row[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + j) / 2.0 + 1.0;
            for (int t = i; t <= j; ++t) ranks[order[t]] = avg;
            i = j + 1;
        }
        for (int c = 0; c < k; ++c) rank_sums[c] += ranks[c];
        ++result.blocks_used;
    }

    const int n = result.blocks_used;
    if (n < 2) throw DomainError("friedman_test: need at least 2 complete rows");

    const double mid = (k + 1) / 2.0;
    double ssq = 0.0;
    for (int c = 0; c < k; ++c) {
        const double mean_rank = rank_sums[c] / n;
        ssq += (mean_rank - mid) * (mean_rank - mid);
    }
    result.statistic = 12.0 * n / (k * (k + 1.0)) * ssq;

    boost::math::chi_squared chi2(k - 1.0);
    result.p_value = boost::math::cdf(boost::math::complement(chi2, result.statistic));
    return result;
}

}  // namespace volcast::data
