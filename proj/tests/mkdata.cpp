// Test helper: writes seeded synthetic fvecs (rotated decaying Gaussian)
// so the CLI smoke test has deterministic inputs.

#include <cstdlib>
#include <iostream>
#include <string>

#include "pano/io.hpp"
#include "support.hpp"

int main(int argc, char** argv) {
    if (argc != 6) {
        std::cerr << "usage: mkdata <path> <rows> <dim> <decay> <seed>\n";
        return 2;
    }
    std::string path = argv[1];
    auto rows = static_cast<std::size_t>(std::atoll(argv[2]));
    auto dim = static_cast<std::size_t>(std::atoll(argv[3]));
    double decay = std::atof(argv[4]);
    auto seed = static_cast<std::uint64_t>(std::atoll(argv[5]));
    pano::MatrixF data = decay > 0.0 ? panotest::compacted_gaussian(rows, dim, decay, seed)
                                     : panotest::gaussian_matrix(rows, dim, seed);
    pano::write_vectors(path, data, pano::VectorFormat::fvecs);
    return 0;
}
