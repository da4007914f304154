#include "lejaq/kernel_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace lejaq {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

constexpr const char* kMagic = "lejaq.kernel.v1";

const char* form_name(KernelForm f) {
    switch (f) {
        case KernelForm::Dense: return "dense";
        case KernelForm::Sparse: return "sparse";
        case KernelForm::Structured: return "structured";
    }
    return "?";
}

/// Sequential line reader with positional error messages.
class Lines {
public:
    explicit Lines(std::istream& in) : in_(in) {}

    std::string next(const char* what) {
        std::string line;
        if (!std::getline(in_, line))
            throw std::invalid_argument("kernel file: unexpected end of file, expected " +
                                        std::string(what));
        ++no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    std::string expect_keyed(const std::string& key) {
        const std::string line = next(key.c_str());
        if (line.compare(0, key.size() + 1, key + " ") != 0)
            throw std::invalid_argument("kernel file line " + std::to_string(no_) + ": expected '" +
                                        key + " <value>', got '" + line + "'");
        return line.substr(key.size() + 1);
    }

    double real(const std::string& tok) const {
        try {
            size_t pos = 0;
            const double x = std::stod(tok, &pos);
            if (pos != tok.size() || !std::isfinite(x)) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            throw std::invalid_argument("kernel file line " + std::to_string(no_) +
                                        ": bad real '" + tok + "'");
        }
    }

    long long integer(const std::string& tok) const {
        try {
            size_t pos = 0;
            const long long x = std::stoll(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            throw std::invalid_argument("kernel file line " + std::to_string(no_) +
                                        ": bad integer '" + tok + "'");
        }
    }

    int line_no() const { return no_; }

private:
    std::istream& in_;
    int no_ = 0;
};

void write_vector_block(std::ostream& out, const char* name, const Vector& v) {
    out << name << "\n";
    for (Index i = 0; i < v.size(); ++i) out << format_real(v[i]) << "\n";
}

Vector read_vector_block(Lines& lines, const char* name, Index n) {
    const std::string head = lines.next(name);
    if (head != name)
        throw std::invalid_argument("kernel file line " + std::to_string(lines.line_no()) +
                                    ": expected '" + std::string(name) + "'");
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = lines.real(lines.next("vector entry"));
    return v;
}

void write_entries(std::ostream& out, const SpMat& m) {
    out << "entries " << m.nonZeros() << "\n";
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            out << it.row() << " " << j << " " << format_real(it.value()) << "\n";
}

SpMat read_entries(Lines& lines, Index n) {
    const long long count = lines.integer(lines.expect_keyed("entries"));
    if (count < 0) throw std::invalid_argument("kernel file: negative entry count");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(count));
    for (long long k = 0; k < count; ++k) {
        std::istringstream row(lines.next("matrix entry"));
        std::string tr, tc, tv, extra;
        row >> tr >> tc >> tv;
        if (tv.empty() || (row >> extra))
            throw std::invalid_argument("kernel file line " + std::to_string(lines.line_no()) +
                                        ": expected 'row col value'");
        const long long r = lines.integer(tr);
        const long long c = lines.integer(tc);
        if (r < 0 || r >= n || c < 0 || c >= n)
            throw std::invalid_argument("kernel file line " + std::to_string(lines.line_no()) +
                                        ": entry index out of range");
        trips.emplace_back(static_cast<Index>(r), static_cast<Index>(c), lines.real(tv));
    }
    SpMat m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

}  // namespace

void save_kernel(const EquilibriumKernel& k, std::ostream& out) {
    out << kMagic << "\n";
    out << "form " << form_name(k.form()) << "\n";
    out << "n " << k.size() << "\n";
    if (k.form() == KernelForm::Structured) out << "alpha " << format_real(k.alpha()) << "\n";
    out << "capacity " << format_real(k.capacity()) << "\n";
    out << "nonnegative " << (k.nonnegative() ? 1 : 0) << "\n";
    write_vector_block(out, "measure", k.measure().values());
    switch (k.form()) {
        case KernelForm::Dense: {
            const Matrix& g = k.dense_part();
            Index count = 0;
            for (Index j = 0; j < g.cols(); ++j)
                for (Index i = 0; i < g.rows(); ++i)
                    if (g(i, j) != 0.0) ++count;
            out << "entries " << count << "\n";
            for (Index j = 0; j < g.cols(); ++j)
                for (Index i = 0; i < g.rows(); ++i)
                    if (g(i, j) != 0.0) out << i << " " << j << " " << format_real(g(i, j)) << "\n";
            break;
        }
        case KernelForm::Sparse:
            write_entries(out, k.sparse_part().eigen());
            break;
        case KernelForm::Structured:
            write_vector_block(out, "scaling", k.scaling());
            write_entries(out, k.sparse_part().eigen());
            break;
    }
    out << "end\n";
    if (!out) throw std::runtime_error("save_kernel: write failed");
}

void save_kernel_file(const EquilibriumKernel& k, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    save_kernel(k, out);
}

EquilibriumKernel load_kernel(std::istream& in) {
    Lines lines(in);
    if (lines.next("magic") != kMagic)
        throw std::invalid_argument("kernel file: missing magic '" + std::string(kMagic) + "'");
    const std::string form = lines.expect_keyed("form");
    const long long n_ll = lines.integer(lines.expect_keyed("n"));
    if (n_ll <= 0) throw std::invalid_argument("kernel file: n must be positive");
    const Index n = static_cast<Index>(n_ll);

    double alpha = 0.0;
    if (form == "structured") alpha = lines.real(lines.expect_keyed("alpha"));
    const double capacity = lines.real(lines.expect_keyed("capacity"));
    const long long nonneg = lines.integer(lines.expect_keyed("nonnegative"));
    if (nonneg != 0 && nonneg != 1)
        throw std::invalid_argument("kernel file: nonnegative must be 0 or 1");
    Measure v = Measure::from_values(read_vector_block(lines, "measure", n));

    EquilibriumKernel k = [&] {
        if (form == "dense") {
            const SpMat entries = read_entries(lines, n);
            Matrix g = Matrix::Zero(n, n);
            for (Index j = 0; j < entries.outerSize(); ++j)
                for (SpMat::InnerIterator it(entries, j); it; ++it) g(it.row(), j) = it.value();
            return EquilibriumKernel::dense(std::move(g), std::move(v), capacity);
        }
        if (form == "sparse") {
            return EquilibriumKernel::sparse(SparseSymMatrix::from_sparse(read_entries(lines, n)),
                                             std::move(v), capacity);
        }
        if (form == "structured") {
            Vector d = read_vector_block(lines, "scaling", n);
            return EquilibriumKernel::structured(
                SparseSymMatrix::from_sparse(read_entries(lines, n)), std::move(d), std::move(v),
                alpha, capacity);
        }
        throw std::invalid_argument("kernel file: unknown form '" + form + "'");
    }();

    if (lines.next("end") != "end") throw std::invalid_argument("kernel file: missing 'end'");
    if (k.nonnegative() != (nonneg == 1))
        throw std::invalid_argument("kernel file: nonnegative flag does not match the payload");
    return k;
}

EquilibriumKernel load_kernel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return load_kernel(in);
}

std::string kernel_hash(const EquilibriumKernel& k) {
    std::ostringstream buf;
    save_kernel(k, buf);
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016" PRIx64, fnv1a64(buf.str()));
    return out;
}

}  // namespace lejaq
