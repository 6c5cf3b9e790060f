#pragma once
// Bundled scenario catalog; the files under scenarios/ carry the same text.
// A unit test keeps the two in sync.

#include <string>
#include <vector>

namespace flagwalk::scenario_data {

struct BundledScenario {
  const char* name;
  const char* description;
  const char* text;
};

inline const std::vector<BundledScenario>& catalog() {
  static const std::vector<BundledScenario> k = {
      {"rotation",
       "SO(3) rotation atoms about two axes; isometric cocycle with zero spectrum",
       R"json({
  "allow_asymmetric": false,
  "atoms": [
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.6216099682706644,
          -0.7833269096274834,
          0.0,
          0.7833269096274834,
          0.6216099682706644,
          0.0,
          0.0,
          0.0,
          1.0
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.6216099682706644,
          0.7833269096274834,
          0.0,
          -0.7833269096274834,
          0.6216099682706644,
          0.0,
          0.0,
          0.0,
          1.0
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          1.0,
          0.0,
          0.0,
          0.0,
          0.9210609940028851,
          -0.3894183423086505,
          0.0,
          0.3894183423086505,
          0.9210609940028851
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          1.0,
          0.0,
          0.0,
          0.0,
          0.9210609940028851,
          0.3894183423086505,
          0.0,
          -0.3894183423086505,
          0.9210609940028851
        ]
      ],
      "probability": 0.25
    }
  ],
  "base_distribution": [
    1.0
  ],
  "description": "SO(3) rotation atoms about two axes; isometric cocycle with zero spectrum",
  "dimension": 3,
  "experiments": {
    "conformality": {
      "angle_tol": 0.001,
      "flag_horizon": 200,
      "horizons": [
        20,
        200,
        2000
      ],
      "n_trials": 8
    },
    "exponents": {
      "cluster_tol_rel": 0.01,
      "n_steps": 2000,
      "n_trials": 16
    },
    "furstenberg": {
      "n_mc": 20000
    },
    "stationary": {
      "atom_threshold": 0.2,
      "ball_eps": 0.05,
      "burn_in": 500,
      "n_samples": 600,
      "pullback_horizons": [
        50,
        200,
        800
      ],
      "radius_grid": [
        0.5,
        0.25,
        0.125,
        0.0625,
        0.03125,
        0.015625,
        0.0078125,
        0.005
      ]
    },
    "tracking": {
      "horizons": [
        10,
        100,
        1000
      ],
      "n_paths": 1
    }
  },
  "name": "rotation",
  "seed": 20250801,
  "states": [
    "*"
  ]
}
)json"},
      {"diag-negative-control",
       "Pure diagonal symmetric SL(2) cocycle; not strongly irreducible, defects grow",
       R"json({
  "allow_asymmetric": false,
  "atoms": [
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          2.0,
          0.0,
          0.0,
          0.5
        ]
      ],
      "probability": 0.5
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.5,
          0.0,
          0.0,
          2.0
        ]
      ],
      "probability": 0.5
    }
  ],
  "base_distribution": [
    1.0
  ],
  "description": "Pure diagonal symmetric SL(2) cocycle; not strongly irreducible, defects grow",
  "dimension": 2,
  "experiments": {
    "conformality": {
      "angle_tol": 0.001,
      "flag_horizon": 100,
      "horizons": [
        100,
        1000,
        10000
      ],
      "n_trials": 24
    },
    "exponents": {
      "cluster_tol_rel": 0.01,
      "n_steps": 4000,
      "n_trials": 24
    }
  },
  "name": "diag-negative-control",
  "seed": 20250802,
  "states": [
    "*"
  ]
}
)json"},
      {"sl2-mixed",
       "SL(2,R) with diag(2,1/2) and 1-radian rotation atoms; positive top exponent",
       R"json({
  "allow_asymmetric": false,
  "atoms": [
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          2.0,
          0.0,
          0.0,
          0.5
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.5,
          0.0,
          0.0,
          2.0
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.5403023058681398,
          -0.8414709848078965,
          0.8414709848078965,
          0.5403023058681398
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.5403023058681398,
          0.8414709848078965,
          -0.8414709848078965,
          0.5403023058681398
        ]
      ],
      "probability": 0.25
    }
  ],
  "base_distribution": [
    1.0
  ],
  "description": "SL(2,R) with diag(2,1/2) and 1-radian rotation atoms; positive top exponent",
  "dimension": 2,
  "experiments": {
    "exponents": {
      "cluster_tol_rel": 0.01,
      "n_steps": 5000,
      "n_trials": 24
    },
    "flags": {
      "converge_tol": 0.0001,
      "horizons": [
        30,
        100,
        300,
        1000
      ],
      "n_paths": 6
    },
    "furstenberg": {
      "n_mc": 100000
    },
    "regularity": {
      "eps_grid": [
        0.0125,
        0.025,
        0.05,
        0.1,
        0.2,
        0.4
      ],
      "n_g": 24
    },
    "stationary": {
      "atom_threshold": 0.2,
      "ball_eps": 0.05,
      "burn_in": 1000,
      "n_samples": 600,
      "pullback_horizons": [
        30,
        100,
        400
      ],
      "radius_grid": [
        0.5,
        0.25,
        0.125,
        0.0625,
        0.03125,
        0.015625,
        0.0078125,
        0.005
      ]
    },
    "tracking": {
      "horizons": [
        100,
        1000,
        10000
      ],
      "n_paths": 1
    }
  },
  "name": "sl2-mixed",
  "seed": 20250803,
  "states": [
    "*"
  ]
}
)json"},
      {"sl2c-realified",
       "Realified SL(2,C) in dimension 4; paired spectrum with conformal 2-blocks",
       R"json({
  "allow_asymmetric": false,
  "atoms": [
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          1.529684374568977,
          -1.288435374475382,
          0.0,
          -0.0,
          1.288435374475382,
          1.529684374568977,
          0.0,
          0.0,
          0.0,
          -0.0,
          0.3824210936422442,
          0.32210884361884545,
          0.0,
          0.0,
          -0.32210884361884545,
          0.3824210936422442
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.3824210936422442,
          0.32210884361884545,
          0.0,
          -0.0,
          -0.32210884361884545,
          0.3824210936422442,
          0.0,
          0.0,
          0.0,
          -0.0,
          1.529684374568977,
          -1.288435374475382,
          0.0,
          0.0,
          1.288435374475382,
          1.529684374568977
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.665589341657975,
          -0.20589091072861615,
          0.6295391960392663,
          -0.34391883025050934,
          0.20589091072861615,
          0.665589341657975,
          0.34391883025050934,
          0.6295391960392663,
          -0.6295391960392663,
          -0.34391883025050934,
          0.665589341657975,
          0.20589091072861615,
          0.34391883025050934,
          -0.6295391960392663,
          -0.20589091072861615,
          0.665589341657975
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.665589341657975,
          0.20589091072861615,
          -0.6295391960392663,
          0.34391883025050934,
          -0.20589091072861615,
          0.665589341657975,
          -0.34391883025050934,
          -0.6295391960392663,
          0.6295391960392663,
          0.34391883025050934,
          0.665589341657975,
          -0.20589091072861615,
          -0.34391883025050934,
          0.6295391960392663,
          0.20589091072861615,
          0.665589341657975
        ]
      ],
      "probability": 0.25
    }
  ],
  "base_distribution": [
    1.0
  ],
  "description": "Realified SL(2,C) in dimension 4; paired spectrum with conformal 2-blocks",
  "dimension": 4,
  "experiments": {
    "blocks": {
      "angle_tol": 0.001,
      "flag_horizon": 600,
      "n_paths": 40
    },
    "conformality": {
      "angle_tol": 0.001,
      "flag_horizon": 800,
      "horizons": [
        100,
        1000,
        10000
      ],
      "n_trials": 8
    },
    "exponents": {
      "cluster_tol_rel": 0.01,
      "n_steps": 10000,
      "n_trials": 16
    }
  },
  "name": "sl2c-realified",
  "seed": 20250804,
  "states": [
    "*"
  ]
}
)json"},
      {"sl3-generic",
       "SL(3,R) with a generic diagonal and a two-axis rotation; simple spectrum",
       R"json({
  "allow_asymmetric": false,
  "atoms": [
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          2.2,
          0.0,
          0.0,
          0.0,
          1.0,
          0.0,
          0.0,
          0.0,
          0.45454545454545453
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.45454545454545453,
          0.0,
          0.0,
          0.0,
          1.0,
          0.0,
          0.0,
          0.0,
          2.2
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.7648421872844885,
          -0.5933637833613874,
          0.2508701838500143,
          0.644217687237691,
          0.7044663052755917,
          -0.2978435767000479,
          0.0,
          0.3894183423086505,
          0.9210609940028851
        ]
      ],
      "probability": 0.25
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.7648421872844885,
          0.644217687237691,
          0.0,
          -0.5933637833613874,
          0.7044663052755917,
          0.3894183423086505,
          0.2508701838500143,
          -0.2978435767000479,
          0.9210609940028851
        ]
      ],
      "probability": 0.25
    }
  ],
  "base_distribution": [
    1.0
  ],
  "description": "SL(3,R) with a generic diagonal and a two-axis rotation; simple spectrum",
  "dimension": 3,
  "experiments": {
    "blocks": {
      "angle_tol": 0.001,
      "flag_horizon": 400,
      "n_paths": 60
    },
    "exponents": {
      "cluster_tol_rel": 0.01,
      "n_steps": 5000,
      "n_trials": 24
    },
    "flags": {
      "converge_tol": 0.0001,
      "horizons": [
        30,
        100,
        300,
        1000
      ],
      "n_paths": 6
    },
    "stationary": {
      "atom_threshold": 0.2,
      "ball_eps": 0.05,
      "burn_in": 1000,
      "n_samples": 500,
      "pullback_horizons": [
        30,
        100,
        400
      ],
      "radius_grid": [
        0.5,
        0.25,
        0.125,
        0.0625,
        0.03125,
        0.015625,
        0.0078125,
        0.005
      ]
    },
    "tracking": {
      "horizons": [
        100,
        1000,
        10000
      ],
      "n_paths": 1
    }
  },
  "name": "sl3-generic",
  "seed": 20250805,
  "states": [
    "*"
  ]
}
)json"},
      {"reducible-line-control",
       "Upper-triangular SL(2) atoms fixing a line; reducible control for the atom test",
       R"json({
  "allow_asymmetric": true,
  "atoms": [
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          2.0,
          1.0,
          0.0,
          0.5
        ]
      ],
      "probability": 0.7
    },
    {
      "base_map": [
        0
      ],
      "matrices": [
        [
          0.5,
          -1.0,
          0.0,
          2.0
        ]
      ],
      "probability": 0.3
    }
  ],
  "base_distribution": [
    1.0
  ],
  "description": "Upper-triangular SL(2) atoms fixing a line; reducible control for the atom test",
  "dimension": 2,
  "experiments": {
    "exponents": {
      "cluster_tol_rel": 0.01,
      "n_steps": 4000,
      "n_trials": 16
    },
    "stationary": {
      "atom_threshold": 0.2,
      "ball_eps": 0.05,
      "burn_in": 2000,
      "n_samples": 400,
      "pullback_horizons": [
        30,
        100,
        400
      ],
      "radius_grid": [
        0.5,
        0.25,
        0.125,
        0.0625,
        0.03125,
        0.015625,
        0.0078125,
        0.005
      ]
    }
  },
  "name": "reducible-line-control",
  "seed": 20250806,
  "states": [
    "*"
  ]
}
)json"},
  };
  return k;
}

}  // namespace flagwalk::scenario_data
