// Builds the terrace of a reaction file and prints each front's speed and
// support width, then the terrace function on a coarse grid.
//
//   sample_terrace samples/exampleC.json

#include <cstdio>
#include <exception>

#include "terrace.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s REACTION.json\n", argv[0]);
        return 2;
    }
    try {
        const auto spec = terrace::validate(terrace::parse_reaction(terrace::io::read_file(argv[1])));
        const auto t = terrace::build_terrace(spec, terrace::Tolerances{});
        const auto tf = terrace::make_terrace_function(spec, t);
        for (std::size_t j = 0; j < t.size(); ++j) {
            const auto& f = t.fronts[j];
            std::printf("front %zu: %g -> %g  speed %.10f  width %.10f  shift %.6f\n", j + 1, f.upper, f.lower,
                        f.speed, tf.profiles[j].width, tf.shifts[j]);
        }
        for (double x = -1.0; x <= 6.0; x += 0.5) std::printf("  Phi(0, %4.1f) = %.6f\n", x, tf(0.0, x));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
