#pragma once

// Shared test fixtures.

#include <string_view>

namespace fixtures {

// The 24 reference model comparisons verbatim, including the two rows whose level
// name ("Tiny") disagrees with the stated factor (0.1).
inline constexpr std::string_view kModelComparison =
    "Scaling factor (value)\tDocument Collection\tView\tMedian\tMean\tStandard deviation of mean\t"
    "Standard error of mean\tUnique Topic Labels\n"
    "Small (0.1)\tsentences\tboth\t8.0\t7.4\t3.2\t0.4\t38\n"
    "Small (0.1)\tsentences\tdocs\t8.0\t6.5\t3.4\t0.4\t31\n"
    "Tiny (0.01)\tsentences\tboth\t8.0\t6.4\t3.7\t0.5\t33\n"
    "Tiny (0.01)\treport\tboth\t8.0\t6.4\t3.7\t0.5\t32\n"
    "Small (0.1)\treport\tboth\t8.0\t6.3\t3.6\t0.5\t29\n"
    "Small (0.1)\treport\twords\t7.0\t6.2\t3.4\t0.4\t27\n"
    "Tiny (0.01)\tsentences\twords\t7.0\t6.0\t3.0\t0.4\t31\n"
    "Normal (1)\tsentences\tboth\t7.0\t5.9\t3.4\t0.4\t33\n"
    "Normal (1)\tsentences\tdocs\t6.0\t5.7\t3.5\t0.5\t30\n"
    "Tiny (0.01)\tsentences\tdocs\t7.5\t5.7\t3.8\t0.5\t26\n"
    "Normal (1)\treport\twords\t5.0\t5.6\t3.6\t0.5\t40\n"
    "Large (10)\treport\twords\t6.0\t5.1\t3.7\t0.5\t26\n"
    "Small (0.1)\treport\tdocs\t5.0\t5.0\t3.6\t0.5\t28\n"
    "Tiny (0.1)\treport\twords\t5.0\t4.6\t2.9\t0.4\t37\n"
    "Tiny (0.1)\treport\tdocs\t4.0\t4.4\t3.5\t0.5\t30\n"
    "Small (0.1)\tsentences\twords\t5.0\t4.3\t3.5\t0.4\t24\n"
    "Normal (1)\tsentences\twords\t3.0\t4.3\t4.0\t0.5\t22\n"
    "Large (10)\tsentences\tboth\t3.0\t4.2\t4.0\t0.5\t20\n"
    "Large (10)\tsentences\twords\t3.0\t3.8\t3.9\t0.5\t22\n"
    "Normal (1)\treport\tboth\t2.0\t3.5\t3.4\t0.4\t28\n"
    "Large (10)\treport\tboth\t2.0\t3.2\t3.2\t0.4\t22\n"
    "Large (10)\tsentences\tdocs\t0.0\t3.0\t3.9\t0.5\t18\n"
    "Normal (1)\treport\tdocs\t1.0\t2.3\t3.2\t0.4\t20\n"
    "Large (10)\treport\tdocs\t0.5\t1.7\t2.6\t0.3\t14\n";

}  // namespace fixtures
