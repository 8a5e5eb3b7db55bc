//! Shared fixtures for the integration suites.

/// Malformed model inputs with the line each error must point at and a
/// fragment the message must contain.
pub fn malformed_cases() -> Vec<(String, usize, &'static str)> {
    let header = "\
[system]
systems = 2
levels = 2
dim n11
dim n10
dim n01
energies = 0.0 1.0
mode cav fock=4 energy=1.0

[liouvillian]
mls_mode_rwa 0 1 cav 1.0

[initial]
kind = pure
qnumbers = 1 0 0 0 0

[solve]
method = rk4
dt = 0.002
t_end = 10.0
";
    vec![
        (String::new(), 1, "missing [system]"),
        ("x = 1\n".into(), 1, "before any section"),
        ("[system\n".into(), 1, "unterminated section header"),
        ("[banana]\n".into(), 1, "unknown section"),
        ("[system]\n[system]\n".into(), 2, "duplicate section"),
        ("[system]\nsystems 2\n".into(), 2, "expected '='"),
        ("[system]\nsystems = two\n".into(), 2, "expected an integer"),
        ("[system]\nsystems = 2\nlevels = 2\ndim n00\n".into(), 4, "n00"),
        ("[system]\nsystems = 2\nlevels = 2\ndim n11\ndim n11\n".into(), 5, "duplicate dim"),
        ("[system]\nsystems = 2\nlevels = 2\ndim nxy\n".into(), 4, "dimension name"),
        ("[system]\nsystems = 2\nlevels = 2\ndim n21\nenergies = 0 1\n".into(), 4, "exceeds the level count"),
        ("[system]\nsystems = 2\nlevels = 2\ndim n11 cutoff=abc\n".into(), 4, "malformed cutoff"),
        ("[system]\nsystems = 2\nlevels = 2\nmode cav fock=4 energy=1\ndim n11\n".into(), 5, "before modes"),
        ("[system]\nsystems = 2\nlevels = 2\ndim n11\nmode cav fock=4\n".into(), 5, "mode declaration"),
        ("[system]\nsystems = 2\nlevels = 2\ndim n11\nmode cav fock=4 energy=1\nmode cav fock=2 energy=1\n".into(), 6, "duplicate mode"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "mls_mode_rwa 0 1 cav 1.0\nlindblad_deph_mls n21 0.1"), 12, "n21"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "mls_mode_rwa 0 1 drum 1.0"), 11, "mode 'drum'"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "mls_mode_rwa 0 5 cav 1.0"), 11, "level 5 out of range"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "frobnicate n11 1.0"), 11, "unknown Liouvillian term"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "nonconnecting n11 (0.3,"), 11, "unterminated"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "nonconnecting n11 (0.3)"), 11, "two components"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "nonconnecting n11 (a, b)"), 11, "malformed complex real part"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "product (1.0, 0.0) J11X"), 11, "must end in L or R"),
        (header.replace("mls_mode_rwa 0 1 cav 1.0", "product (1.0, 0.0) bL@drum"), 11, "mode 'drum'"),
        (header.replace("kind = pure", "kind = squeezed"), 14, "unknown initial kind"),
        (header.replace("qnumbers = 1 0 0 0 0", "qnumbers = 1 0 x 0 0"), 15, "expected an integer"),
        (header.replace("qnumbers = 1 0 0 0 0", "qnumbers = 1 0 0"), 15, "qnumbers needs 5 entries"),
        (header.replace("kind = pure\nqnumbers = 1 0 0 0 0", "kind = thermal\ntemperature = -3.0"), 15, "temperature must be positive"),
        (header.replace("method = rk4", "method = simulated_annealing"), 18, "unknown method"),
        (header.replace("method = rk4\ndt = 0.002\nt_end = 10.0", "method = steady\ndt = 0.002"), 18, "choose one solve mode"),
        (header.replace("method = rk4\ndt = 0.002\nt_end = 10.0", "method = rk4\nt_end = 10.0"), 18, "rk4 needs 'dt'"),
        (format!("{header}\n[output]\nobservable x mls_occupation n11\n"), 23, "preceding 'file'"),
        (format!("{header}\n[output]\nfile obs.dat\nobservable x mls_occupation n21\n"), 24, "n21"),
        (format!("{header}\n[output]\nfile obs.dat\nobservable x telescope n11\n"), 24, "unknown observable kind"),
        (format!("{header}\n[output]\ncadence = 0\n"), 23, "cadence"),
    ]
}
