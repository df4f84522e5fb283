#!/usr/bin/env python3
"""Generate the bundled 100-problem battery-materials fixture corpus.

Size mix under config/default.json: 10 problems with every field single-valued
(15 triples), 72 with one extra system or intervention value (16), 15 with two
systems and two interventions (17), 3 with two interventions and two target
properties (18).
"""
import json
import random
import sys

SYSTEMS = ["lithium-ion battery", "sodium-ion battery", "lithium-metal battery", "lithium-sulfur battery",
           "solid-state lithium battery", "zinc-ion battery", "potassium-ion battery", "magnesium battery",
           "lithium-air battery", "aqueous zinc battery", "silicon-anode lithium cell", "high-voltage lithium cell"]
COMPONENTS = ["nickel-rich layered oxide cathode", "lithium iron phosphate cathode", "silicon anode",
              "graphite anode", "lithium metal anode", "sulfur cathode", "garnet solid electrolyte",
              "sulfide solid electrolyte", "carbonate liquid electrolyte", "polymer separator",
              "prussian blue cathode", "hard carbon anode", "zinc metal anode", "manganese oxide cathode",
              "cathode electrolyte interphase", "solid electrolyte interphase"]
FAILURES = ["capacity fade", "transition metal dissolution", "lithium dendrite growth", "particle cracking",
            "polysulfide shuttle", "oxygen release", "impedance growth", "volume expansion", "zinc dendrite plating",
            "electrolyte oxidation", "phase transition instability", "interfacial side reactions",
            "gas evolution", "voltage decay", "lithium plating", "binder delamination"]
MECHANISMS = ["lattice oxygen loss", "anisotropic lattice strain", "nonuniform lithium flux", "space charge layer formation",
              "hydrofluoric acid attack", "jahn-teller distortion", "sei rupture and regrowth", "cation mixing",
              "polysulfide dissolution and diffusion", "grain boundary conduction", "electrochemical creep",
              "surface reconstruction to rock salt", "solvent co-intercalation", "current crowding at defects",
              "chemical crossover", "stress corrosion along grain boundaries"]
INTERVENTIONS = ["atomic layer deposited alumina coating", "niobium doping", "fluorinated electrolyte additive",
                 "artificial sei layer", "carbon nanotube scaffold", "single-crystal particle engineering",
                 "lithium nitrate additive", "concentration gradient design", "polymer binder crosslinking",
                 "zirconium surface modification", "interlayer insertion", "high-concentration electrolyte",
                 "boron doping", "prelithiation treatment", "conformal lithium phosphate coating",
                 "localized high-concentration electrolyte", "sulfur host with polar sites", "titanium substitution"]
PROPERTIES = ["cycle life", "coulombic efficiency", "rate capability", "thermal stability", "interfacial stability",
              "ionic conductivity", "structural integrity", "first-cycle efficiency", "energy density",
              "voltage retention", "critical current density", "low-temperature performance"]
OUTCOMES = ["90 percent capacity retention after 500 cycles", "stable cycling at 4.5 volts",
            "dendrite-free operation for 1000 hours", "doubled cycle life at high rate",
            "suppressed gas generation during storage", "coulombic efficiency above 99.5 percent",
            "threefold lower impedance rise", "stable operation at 60 degrees celsius",
            "reversible capacity above 200 mah per gram", "negligible voltage decay over 300 cycles",
            "critical current density above 1 ma per square centimeter", "uniform zinc deposition over 2000 cycles"]

STATEMENTS = [
    "How can {failure} in the {component} of a {system} be suppressed to improve {prop}?",
    "The {component} in {system} designs suffers from {failure}; what modification would raise its {prop}?",
    "Propose a strategy to limit {failure} of the {component} so that the {system} achieves better {prop}.",
    "What materials design could mitigate {failure} at the {component} and extend {prop} in a {system}?",
]


def problem(idx, rng, n_system, n_intervention, n_property):
    systems = rng.sample(SYSTEMS, n_system)
    interventions = rng.sample(INTERVENTIONS, n_intervention)
    props = rng.sample(PROPERTIES, n_property)
    component = rng.choice(COMPONENTS)
    failure = rng.choice(FAILURES)
    statement = rng.choice(STATEMENTS).format(failure=failure, component=component, system=systems[0], prop=props[0])
    return {
        "id": f"battery-{idx:03d}",
        "problem_statement": statement[0].upper() + statement[1:],
        "material_system": "; ".join(systems),
        "component": component,
        "failure_mode": failure,
        "intervention": "; ".join(interventions),
        "mechanism": rng.choice(MECHANISMS),
        "target_property": "; ".join(props),
        "claimed_outcome": rng.choice(OUTCOMES),
    }


def main():
    rng = random.Random(20240917)
    shapes = [(1, 1, 1)] * 10 + [(2, 1, 1)] * 36 + [(1, 2, 1)] * 36 + [(2, 2, 1)] * 15 + [(1, 2, 2)] * 3
    rng.shuffle(shapes)
    out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w", encoding="utf-8")
    for i, shape in enumerate(shapes, start=1):
        out.write(json.dumps(problem(i, rng, *shape), sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
