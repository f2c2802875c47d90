#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "bowtie/mesh.hpp"

namespace bowtie {

void write_mesh(std::ostream& os, const TriangleMesh& m) {
    char buf[128];
    os << "vertices " << m.vertex_count() << " triangles " << m.triangle_count() << '\n';
    for (std::size_t i = 0; i < m.vertex_count(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", m.vertices[i].x, m.vertices[i].y,
                      static_cast<int>(m.boundary_flag[i]));
        os << buf;
    }
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const auto& tri = m.triangles[t];
        os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << static_cast<int>(m.region[t]) << '\n';
    }
}

std::string mesh_text(const TriangleMesh& m) {
    std::ostringstream os;
    write_mesh(os, m);
    return os.str();
}

std::string mesh_hash(const TriangleMesh& m) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : mesh_text(m)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bowtie
