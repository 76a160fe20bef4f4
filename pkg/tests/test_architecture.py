import ionaddress


def test_rotation_algebra_is_self_contained(archrule):
    archrule("rotation algebra").match("ionaddress.rotor", "ionaddress.clifford").should_not_import(
        "ionaddress.synth*",
        "ionaddress.qsim*",
        "ionaddress.bench",
        "ionaddress.calib*",
        "ionaddress.config",
        "ionaddress.cli",
    ).check(ionaddress, skip_type_checking=True)


def test_synthesis_does_not_depend_on_simulation(archrule):
    archrule("synthesis").match("ionaddress.synth*").should_not_import(
        "ionaddress.qsim*", "ionaddress.bench", "ionaddress.calib*", "ionaddress.cli"
    ).check(ionaddress, skip_type_checking=True)


def test_library_does_not_import_cli(archrule):
    archrule("command line").match("ionaddress*").exclude(
        "ionaddress.cli", "ionaddress.__main__"
    ).should_not_import("ionaddress.cli").check(ionaddress, skip_type_checking=True)
