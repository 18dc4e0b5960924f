use super::{tuples, FiniteStructure, Interp, ModelError};

/// A sort-respecting injection: `map[sort][a]` is the image of element `a`.
pub type Embedding = Vec<Vec<u32>>;

/// All embeddings `A → B`: injective per sort, commuting with functions and
/// constants, preserving and reflecting relations. Listed in lexicographic
/// order of images.
pub fn embeddings(a: &FiniteStructure, b: &FiniteStructure) -> Result<Vec<Embedding>, ModelError> {
    if a.lang != b.lang {
        return Err(ModelError::LanguageMismatch);
    }
    a.validate()?;
    b.validate()?;
    let order: Vec<(usize, u32)> =
        a.sizes.iter().enumerate().flat_map(|(s, &n)| (0..n as u32).map(move |e| (s, e))).collect();
    let mut search = Search {
        a,
        b,
        map: a.sizes.iter().map(|&n| vec![u32::MAX; n]).collect(),
        used: b.sizes.iter().map(|&n| vec![false; n]).collect(),
        order,
        out: Vec::new(),
    };
    search.go(0);
    Ok(search.out)
}

struct Search<'a> {
    a: &'a FiniteStructure,
    b: &'a FiniteStructure,
    map: Embedding,
    used: Vec<Vec<bool>>,
    order: Vec<(usize, u32)>,
    out: Vec<Embedding>,
}

impl Search<'_> {
    fn go(&mut self, k: usize) {
        if k == self.order.len() {
            if self.homomorphic() {
                self.out.push(self.map.clone());
            }
            return;
        }
        let (s, e) = self.order[k];
        for img in 0..self.b.sizes[s] as u32 {
            if self.used[s][img as usize] {
                continue;
            }
            self.map[s][e as usize] = img;
            self.used[s][img as usize] = true;
            if self.relations_ok((s, e)) {
                self.go(k + 1);
            }
            self.used[s][img as usize] = false;
            self.map[s][e as usize] = u32::MAX;
        }
    }

    fn dims(&self, sym: usize) -> Vec<usize> {
        let lang = &self.a.lang;
        lang.symbols()[sym].args.iter().map(|s| self.a.sizes[lang.sort_index(s).expect("sort")]).collect()
    }

    fn sorts(&self, sym: usize) -> Vec<usize> {
        let lang = &self.a.lang;
        lang.symbols()[sym].args.iter().map(|s| lang.sort_index(s).expect("sort")).collect()
    }

    fn image(&self, sorts: &[usize], args: &[u32]) -> Option<Vec<u32>> {
        sorts.iter().zip(args).map(|(&s, &x)| Some(self.map[s][x as usize]).filter(|&y| y != u32::MAX)).collect()
    }

    /// Checks relation tuples that are fully assigned and involve `new`.
    fn relations_ok(&self, new: (usize, u32)) -> bool {
        for (i, it) in self.a.interp.iter().enumerate() {
            let Some(Interp::Relation(ta)) = it else { continue };
            let Some(Interp::Relation(tb)) = &self.b.interp[i] else { return false };
            let sorts = self.sorts(i);
            for (j, args) in tuples(&self.dims(i)).enumerate() {
                if !sorts.iter().zip(&args).any(|(&s, &x)| (s, x) == new) {
                    continue;
                }
                if let Some(img) = self.image(&sorts, &args) {
                    if ta[j] != tb[self.b.offset(i, &img)] {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn homomorphic(&self) -> bool {
        let lang = &self.a.lang;
        for (i, it) in self.a.interp.iter().enumerate() {
            let res = lang.symbols()[i].result.as_ref().and_then(|s| lang.sort_index(s));
            match (it, &self.b.interp[i], res) {
                (Some(Interp::Constant(c)), Some(Interp::Constant(d)), Some(s)) => {
                    if self.map[s][*c as usize] != *d {
                        return false;
                    }
                }
                (Some(Interp::Function(ta)), Some(Interp::Function(tb)), Some(s)) => {
                    let sorts = self.sorts(i);
                    for (j, args) in tuples(&self.dims(i)).enumerate() {
                        let img = self.image(&sorts, &args).expect("total map");
                        if self.map[s][ta[j] as usize] != tb[self.b.offset(i, &img)] {
                            return false;
                        }
                    }
                }
                _ => {}
            }
        }
        true
    }
}
