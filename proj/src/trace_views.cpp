// SPDX-License-Identifier: Apache-2.0
#include "attnviz/trace_views.hpp"

#include <algorithm>
#include <cmath>

#include "attnviz/error.hpp"

namespace attnviz {

NeuronDetail neuron_detail(const AttentionTrace& trace, std::size_t layer, std::size_t head, std::size_t source) {
    const HeadTrace& ht = trace.at(layer, head);
    const std::size_t n = trace.seq_len();
    if (source >= n) throw Error::bounds("token_index", source, n);

    const std::size_t d = trace.d_head;
    const std::size_t count = allowed_count(trace.mode(), source, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    NeuronDetail nd;
    nd.layer = layer;
    nd.head = head;
    nd.source = source;
    nd.q.assign(ht.q.row(source).begin(), ht.q.row(source).end());
    nd.keys = Matrix(count, d);
    nd.elementwise = Matrix(count, d);
    nd.dot.resize(count);
    nd.scaled.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
        nd.targets.push_back(j);
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            nd.keys(j, c) = ht.k(j, c);
            nd.elementwise(j, c) = nd.q[c] * ht.k(j, c);
            sum += nd.elementwise(j, c);
        }
        nd.dot[j] = sum;
        nd.scaled[j] = sum * scale;
    }
    nd.softmax_out = softmax(nd.scaled);
    return nd;
}

Matrix apply_filter(const AttentionTrace& trace, std::size_t layer, std::size_t head, const FilterSpec& filter) {
    const Matrix& alpha = trace.at(layer, head).alpha;
    const std::size_t n = trace.seq_len();
    switch (filter.kind) {
        case FilterSpec::Kind::All:
            return alpha;
        case FilterSpec::Kind::FromToken: {
            if (filter.token >= n) throw Error::bounds("token_index", filter.token, n);
            Matrix out(n, n);
            std::ranges::copy(alpha.row(filter.token), out.row(filter.token).begin());
            return out;
        }
        case FilterSpec::Kind::Sentence: {
            if (trace.mode() != Mode::Bidirectional) {
                throw Error(ErrorKind::Mode, "sentence filters require a bidirectional trace");
            }
            const auto& seg = trace.input.segments;
            const int src = static_cast<int>(filter.src);
            const int dst = static_cast<int>(filter.dst);
            Matrix out(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                if (seg[i] != src) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (seg[j] == dst) out(i, j) = alpha(i, j);
                }
            }
            return out;
        }
    }
    return alpha;
}

Matrix max_pool(const Matrix& alpha, std::size_t resolution) {
    if (resolution == 0) throw Error(ErrorKind::Domain, "thumbnail resolution must be >= 1");
    const std::size_t n = alpha.rows();
    if (n <= resolution) return alpha;
    const std::size_t r = resolution;
    Matrix grid(r, r);
    for (std::size_t br = 0; br < r; ++br) {
        const std::size_t r0 = br * n / r, r1 = (br + 1) * n / r;
        for (std::size_t bc = 0; bc < r; ++bc) {
            const std::size_t c0 = bc * n / r, c1 = (bc + 1) * n / r;
            double mx = 0.0;
            for (std::size_t i = r0; i < r1; ++i) {
                for (std::size_t j = c0; j < c1; ++j) mx = std::max(mx, alpha(i, j));
            }
            grid(br, bc) = mx;
        }
    }
    return grid;
}

HeadThumbnail thumbnail(const AttentionTrace& trace, std::size_t layer, std::size_t head, std::size_t resolution) {
    return {layer, head, max_pool(trace.at(layer, head).alpha, resolution)};
}

}  // namespace attnviz
