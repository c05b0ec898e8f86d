mod common;

use common::{random_kron, random_ortho, rng};
use tucker_cross::formats::{from_canonical, Tucker};
use tucker_cross::io::{decode_tkr, encode_tkr, load_container, read_manifest, read_tkr, save_container, save_ortho, write_tkr, TkrArray};
use tucker_cross::linalg::random_matrix;
use tucker_cross::{Dense3, Error};

#[test]
fn arrays_roundtrip_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let t = Dense3::random([3, 4, 5], &mut rng(51));
    let path = dir.path().join("t.tkr");
    write_tkr(&path, &(&t).into()).unwrap();
    assert_eq!(read_tkr(&path).unwrap().into_dense3().unwrap(), t);
    let special = TkrArray { dims: vec![2, 2], data: vec![f64::MIN_POSITIVE, -0.0, f64::INFINITY, 1e308] };
    let back = decode_tkr(&encode_tkr(&special).unwrap()).unwrap();
    assert!(back.data.iter().zip(&special.data).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn every_core_kind_roundtrips() {
    let mut r = rng(52);
    let dir = tempfile::tempdir().unwrap();
    let kron = random_kron([6, 5, 4], [2, 1, 2], [1, 2, 2], &mut r);
    let canon = from_canonical(random_matrix(6, 3, &mut r), random_matrix(5, 3, &mut r), random_matrix(4, 3, &mut r)).unwrap();
    let dense = random_ortho([6, 5, 4], [2, 2, 2], &mut r).to_tucker_like();
    for (name, t, kind) in [("kron", &kron, "kron"), ("canon", &canon, "diagonal"), ("dense", &dense, "dense")] {
        let path = dir.path().join(name);
        save_container(&path, t).unwrap();
        let m = read_manifest(&path).unwrap();
        assert_eq!((m.format.as_str(), m.core.as_str(), m.dims, m.ranks), ("tucker-like", kind, t.dims(), t.ranks()));
        assert_eq!(&load_container(&path).unwrap(), t);
    }
}

#[test]
fn no_temporary_files_are_left_behind() {
    let dir = tempfile::tempdir().unwrap();
    save_ortho(&dir.path().join("c"), &random_ortho([4, 4, 4], [1, 2, 1], &mut rng(53))).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("c"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["core.tkr", "manifest.json", "u.tkr", "v.tkr", "w.tkr"]);
}

#[test]
fn inconsistent_containers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c");
    save_ortho(&path, &random_ortho([4, 5, 6], [2, 2, 2], &mut rng(54))).unwrap();
    let manifest = std::fs::read_to_string(path.join("manifest.json")).unwrap();
    std::fs::write(path.join("manifest.json"), manifest.replace("\"dense\"", "\"kron\"")).unwrap();
    assert!(matches!(load_container(&path), Err(Error::Io(_))));
    std::fs::write(path.join("manifest.json"), manifest.replacen('4', "9", 1)).unwrap();
    assert!(matches!(load_container(&path), Err(Error::Format(_))));
    write_tkr(&path.join("u.tkr"), &(&random_matrix(4, 3, &mut rng(55))).into()).unwrap();
    std::fs::write(path.join("manifest.json"), &manifest).unwrap();
    assert!(matches!(load_container(&path), Err(Error::Format(_))));
}
