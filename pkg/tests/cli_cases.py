"""CLI invocations whose outputs are frozen under tests/golden/."""

CASES = {
    "validate_i_k": ["validate", "i_k"],
    "validate_phi": ["validate", "phi_unit_into_two_iso"],
    "validate_plan": ["validate", "cone_two_iso_u"],
    "h0_two_iso": ["h0", "two_iso_objects"],
    "h0_theta": ["h0", "theta"],
    "cohomology_theta": ["cohomology", "theta"],
    "cohomology_hom": ["cohomology", "i_k", "--hom", "0", "1"],
    "tensor_cat": ["tensor-cat", "i_k", "dual_numbers"],
    "op_a2": ["op", "a2_path"],
    "phi_collapse": ["phi", "i_k_collapse"],
    "restrict": ["restrict", "i_k_collapse", "h_unit_pt"],
    "induct": ["induct", "i_k_collapse", "h_i_k_0"],
    "qr_test_rep": ["qr-test", "rep_two_iso_objects_y"],
    "qr_test_diag": ["qr-test", "diag_a2_path"],
    "iso_two_iso": ["iso", "two_iso_objects", "x", "y"],
    "iso_none": ["iso", "i_k", "0", "1"],
    "rhom_yoneda": ["rhom", "h_i_k_1", "h_i_k_0"],
    "rhom_ext": ["rhom", "h_dual_numbers_pt", "h_dual_numbers_pt", "--bar-length", "6"],
    "tensor_strict": ["tensor", "phi_i_k_collapse", "diag_unit", "--strict"],
    "tensor_derived": ["tensor", "phi_unit_into_two_iso", "phi_two_iso_to_unit", "--derived"],
    "hh_dual": ["hh", "dual_numbers", "--max-degree", "3", "--bar-length", "6"],
    "hh_m2": ["hh", "m2", "--max-degree", "3"],
    "map_homotopy_theta": ["map-homotopy", "theta", "--object", "*", "--i", "2"],
    "map_homotopy_endo": ["map-homotopy-endo", "dual_numbers", "--i", "2"],
    "picard": ["picard-verify", "dual_numbers", "diag_dual_numbers", "diag_dual_numbers"],
    "picard_twist": ["picard-verify", "dual_numbers", "phi_dual_sign_twist", "phi_dual_sign_twist"],
    "quotient_unit": ["quotient", "unit", "--kill", "*", "--window", "-4"],
    "quotient_two_iso": ["quotient", "two_iso_objects", "--kill", "x", "--window", "-4", "--validate"],
    "localize_i_k": ["localize", "i_k", "--invert", "f"],
    "cell_build": ["cell-build", "cone_i_k_f"],
    "examples_list": ["examples"],
    "examples_i_k": ["examples", "i_k"],
}
