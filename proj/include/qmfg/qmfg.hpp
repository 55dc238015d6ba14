#pragma once

#include "qmfg/belavkin.hpp"
#include "qmfg/config.hpp"
#include "qmfg/core.hpp"
#include "qmfg/game.hpp"
#include "qmfg/gellmann.hpp"
#include "qmfg/interaction.hpp"
#include "qmfg/io.hpp"
#include "qmfg/meanfield.hpp"
#include "qmfg/mfg.hpp"
#include "qmfg/nparticle.hpp"
#include "qmfg/projective.hpp"
#include "qmfg/rng.hpp"
#include "qmfg/runner.hpp"
#include "qmfg/sphere.hpp"
#include "qmfg/threading.hpp"
#include "qmfg/version.hpp"
#include "qmfg/wave.hpp"
