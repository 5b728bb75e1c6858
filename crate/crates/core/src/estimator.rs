//! placeholder
pub struct ErrorReport<T>(std::marker::PhantomData<T>);
