// Times one generation of evaluation with the serial reference and the
// OpenMP kernel, and checks that both produce the same records.
//
//   bench_evaluation [population] [swarm_size] [ticks] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "swarmcode/evaluation.hpp"
#include "swarmcode/evolution.hpp"

using namespace swarmcode;

namespace {

template <class F>
double time_best(int repeats, F&& f)
{
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv)
{
    ScenarioConfig s;
    s.evolution.population_size = argc > 1 ? std::atoi(argv[1]) : 30;
    s.swarm_size = argc > 2 ? std::atoi(argv[2]) : 10;
    s.physics.ticks = argc > 3 ? std::atoi(argv[3]) : 1000;
    const int repeats = argc > 4 ? std::atoi(argv[4]) : 3;

    const EvolutionState st = initial_state(s, 7);
    const SpeciesPartition part = assign_species(st.population, {}, s.evolution.delta, effective_distance(s));

    std::vector<IndividualEvaluation> serial, parallel;
    const double t_serial = time_best(repeats, [&] {
        SpeciesPartition p = part;
        serial = evaluate_generation_serial(st.population, p, st.fitness, s, 7, 0);
    });
    const double t_omp = time_best(repeats, [&] {
        SpeciesPartition p = part;
        parallel = evaluate_generation(st.population, p, st.fitness, s, 7, 0);
    });

    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i)
        same = serial[i].record.smoothed == parallel[i].record.smoothed &&
               serial[i].team.deliveries == parallel[i].team.deliveries;

    std::printf("population %d, swarm %d, ticks %d, trials %d, species %zu\n", s.evolution.population_size,
                s.swarm_size, s.physics.ticks, s.evaluation.n_trials, part.species.size());
    std::printf("serial   %8.3f s\n", t_serial);
    std::printf("openmp   %8.3f s  (%d threads, speedup %.2fx)\n", t_omp, omp_get_max_threads(),
                t_serial / t_omp);
    std::printf("results  %s\n", same ? "identical" : "DIFFERENT");
    return same ? 0 : 1;
}
